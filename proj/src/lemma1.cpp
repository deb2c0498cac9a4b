#include <cmath>
#include <memory>
#include <stdexcept>

#include "cnnsgd/sgd.hpp"

namespace cnnsgd {

namespace {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double dist2(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

}  // namespace

Lemma1Result lemma1_check(const Lemma1Problem& pb) {
    const int T = pb.steps;
    if (T < 1) throw ConfigError("lemma1_check: need at least one step");
    if (static_cast<int>(pb.v.size()) < T) throw ConfigError("lemma1_check: need v_0..v_{t-1}");
    const double lambda = 1.0 / T;

    Vec u = pb.u0;
    double sum_F = 0.0;
    double residual = 0.0;
    for (int t = 0; t < T; ++t) {
        const Vec& v = pb.v[t];
        sum_F += pb.F(u, v);
        const Vec gt = pb.grad_Ft(t, u, v);
        const Vec g = pb.grad_F(u, v);
        Vec diff(u.size());
        Vec gap(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            diff[i] = g[i] - gt[i];
            gap[i] = u[i] - pb.u_star[i];
        }
        residual += dot(diff, gap);
        Vec step(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) step[i] = u[i] - lambda * gt[i];
        u = pb.proj_A(step);
    }

    const double f_star0 = pb.F(pb.u_star, pb.v[0]);
    double drift = 0.0;
    for (int t = 1; t < T; ++t) drift += std::abs(pb.F(pb.u_star, pb.v[t]) - f_star0);

    Lemma1Result r;
    r.lhs = sum_F / T;
    r.residual = residual / T;
    r.rhs = f_star0 + drift / T + dist2(pb.u_star, pb.u0) / 2.0 + pb.D * pb.D / (2.0 * T) + r.residual;
    return r;
}

Lemma1Problem random_quadratic_problem(int dim_u, int dim_v, int steps, double alpha, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    struct Piece {
        std::vector<Vec> S;  // dim_u x dim_u
        Vec c;
        std::vector<Vec> G;  // dim_u x dim_v
    };
    auto pieces = std::make_shared<std::vector<Piece>>();
    double D = 0.0;
    const double radius_A = std::min(1.0, std::sqrt(alpha));
    for (int t = 0; t < steps; ++t) {
        Piece p;
        p.S.assign(dim_u, Vec(dim_u));
        p.G.assign(dim_u, Vec(dim_v));
        p.c.assign(dim_u, 0.0);
        double fs = 0.0, fg = 0.0, nc = 0.0;
        for (int i = 0; i < dim_u; ++i) {
            for (int j = 0; j < dim_u; ++j) {
                p.S[i][j] = 0.5 * gauss(rng);
                fs += p.S[i][j] * p.S[i][j];
            }
            for (int j = 0; j < dim_v; ++j) {
                p.G[i][j] = 0.3 * gauss(rng);
                fg += p.G[i][j] * p.G[i][j];
            }
            p.c[i] = 0.5 * unif(rng);
            nc += p.c[i] * p.c[i];
        }
        // grad = S^T S (u - c - G v); |S^T S| <= |S|_F^2
        D = std::max(D, fs * (radius_A + std::sqrt(nc) + std::sqrt(fg)));
        pieces->push_back(std::move(p));
    }

    auto residual = [pieces, dim_u, dim_v](int t, const Vec& u, const Vec& v) {
        const Piece& p = (*pieces)[t];
        Vec r(dim_u);
        for (int i = 0; i < dim_u; ++i) {
            double gv = 0.0;
            for (int j = 0; j < dim_v; ++j) gv += p.G[i][j] * v[j];
            r[i] = u[i] - p.c[i] - gv;
        }
        Vec sr(dim_u, 0.0);
        for (int i = 0; i < dim_u; ++i)
            for (int j = 0; j < dim_u; ++j) sr[i] += p.S[i][j] * r[j];
        return sr;
    };
    auto value_t = [residual](int t, const Vec& u, const Vec& v) {
        const Vec sr = residual(t, u, v);
        return 0.5 * dot(sr, sr);
    };
    auto grad_t = [pieces, residual, dim_u](int t, const Vec& u, const Vec& v) {
        const Piece& p = (*pieces)[t];
        const Vec sr = residual(t, u, v);
        Vec g(dim_u, 0.0);
        for (int i = 0; i < dim_u; ++i)
            for (int j = 0; j < dim_u; ++j) g[j] += p.S[i][j] * sr[i];
        return g;
    };

    Lemma1Problem pb;
    pb.steps = steps;
    pb.Ft = value_t;
    pb.grad_Ft = grad_t;
    pb.F = [value_t, steps](const Vec& u, const Vec& v) {
        double s = 0.0;
        for (int t = 0; t < steps; ++t) s += value_t(t, u, v);
        return s / steps;
    };
    pb.grad_F = [grad_t, steps, dim_u](const Vec& u, const Vec& v) {
        Vec g(dim_u, 0.0);
        for (int t = 0; t < steps; ++t) {
            const Vec gt = grad_t(t, u, v);
            for (int i = 0; i < dim_u; ++i) g[i] += gt[i];
        }
        for (double& x : g) x /= steps;
        return g;
    };
    pb.proj_A = [alpha](const Vec& u) { return project_A(u, alpha); };
    pb.D = D;
    pb.u0.assign(dim_u, 0.0);
    for (int t = 0; t < steps; ++t) {
        Vec v(dim_v);
        for (double& x : v) x = unif(rng);
        double n = 0.0;
        for (double x : v) n += x * x;
        if (n > 1.0)
            for (double& x : v) x /= std::sqrt(n);
        pb.v.push_back(v);
    }
    Vec us(dim_u);
    for (double& x : us) x = unif(rng);
    pb.u_star = project_A(us, alpha);
    return pb;
}

}  // namespace cnnsgd
