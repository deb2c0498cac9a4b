#include "cnnsgd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cnnsgd/bounds.hpp"
#include "cnnsgd/embed.hpp"
#include "cnnsgd/gadgets.hpp"
#include "cnnsgd/grad.hpp"
#include "cnnsgd/hmax.hpp"
#include "cnnsgd/parallel.hpp"
#include "cnnsgd/sgd.hpp"
#include "cnnsgd/taylor.hpp"

namespace cnnsgd {

bool VerifyReport::passed() const { return failures() == 0; }

int VerifyReport::failures() const {
    return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.passed; }));
}

void VerifyReport::add(std::string name, double measured, double tolerance, bool ok) {
    checks.push_back({std::move(name), measured, tolerance, ok});
}

void VerifyReport::add_le(std::string name, double measured, double tolerance) {
    add(std::move(name), measured, tolerance, measured <= tolerance);
}

std::string VerifyReport::csv() const {
    std::string out = "suite,check,measured,tolerance,passed\n";
    char buf[96];
    for (const auto& c : checks) {
        out += suite + "," + c.name;
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%d\n", c.measured, c.tolerance, c.passed ? 1 : 0);
        out += buf;
    }
    return out;
}

std::string VerifyReport::summary() const {
    std::ostringstream os;
    os << suite << ": " << (checks.size() - failures()) << "/" << checks.size() << " checks passed";
    for (const auto& c : checks)
        if (!c.passed) os << "\n  FAIL " << c.name << " measured " << c.measured << " tolerance " << c.tolerance;
    return os.str();
}

namespace {

std::string idx(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

ImageGrid random_image(int d1, int d2, Rng& rng) {
    std::vector<double> px(static_cast<std::size_t>(d1) * d2);
    for (auto& v : px) v = uniform(rng, 0.0, 1.0);
    return ImageGrid(d1, d2, std::move(px));
}

CnnParams random_params(const CnnConfig& cfg, double B, Rng& rng) {
    CnnParams p = CnnParams::zeros(cfg);
    for (auto& v : p.flat) v = uniform(rng, -B, B);
    return p;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// ---------------------------------------------------------------- gradients

struct GradInstance {
    CnnConfig cfg;
    EnsembleParams ens;
    ImageGrid x;
    int y = 1;
};

GradInstance random_grad_instance(Rng& rng) {
    GradInstance g;
    const int d1 = uniform_int(rng, 2, 6), d2 = uniform_int(rng, 2, 6);
    g.cfg.L1 = uniform_int(rng, 1, 2);
    for (int r = 0; r < g.cfg.L1; ++r) {
        g.cfg.channels.push_back(uniform_int(rng, 1, 3));
        g.cfg.filter_sizes.push_back(uniform_int(rng, 1, std::min({d1, d2, 3})));
    }
    g.cfg.L2 = uniform_int(rng, 1, 4);
    g.cfg.beta = uniform(rng, 0.5, 3.0);
    const int K = uniform_int(rng, 1, 4);
    for (int k = 0; k < K; ++k) {
        g.ens.thetas.push_back(random_params(g.cfg, 1.0, rng));
        g.ens.w.push_back(uniform(rng, 0.0, 1.0) / K);
    }
    g.ens.theta0 = g.ens.thetas;
    g.x = random_image(d1, d2, rng);
    g.y = uniform(rng, 0.0, 1.0) < 0.5 ? -1 : 1;
    return g;
}

bool kink_free(const GradInstance& g, double margin) {
    for (const auto& th : g.ens.thetas) {
        const CnnForward fw = cnn_forward(g.cfg, th, g.x);
        if (kink_margin(fw) < margin) return false;
        if (std::abs(std::abs(fw.value) - g.cfg.beta) < margin) return false;
    }
    return true;
}

VerifyReport suite_gradients(const VerifyOptions& opt) {
    VerifyReport rep;
    rep.suite = "gradients";
    Rng rng(substream_seed(opt.seed, 1));
    std::vector<GradInstance> inst;
    for (int attempt = 0; inst.size() < 100 && attempt < 100000; ++attempt) {
        GradInstance g = random_grad_instance(rng);
        if (kink_free(g, 1e-3)) inst.push_back(std::move(g));
    }
    rep.add("instances", static_cast<double>(inst.size()), 100, inst.size() == 100);
    std::vector<double> rel(inst.size());
    parallel_for(inst.size(), opt.threads, [&](std::size_t i) {
        const GradInstance& g = inst[i];
        const GradBundle an = grad_ensemble(g.cfg, g.ens, g.x, g.y);
        std::vector<double> point = g.ens.w;
        const std::vector<double> flat = flatten_thetas(g.ens.thetas);
        point.insert(point.end(), flat.begin(), flat.end());
        const std::size_t K = g.ens.w.size();
        auto loss = [&](const std::vector<double>& v) {
            EnsembleParams e = g.ens;
            e.w.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(K));
            unflatten_thetas(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(K), v.end()), e.thetas);
            return ensemble_loss(g.cfg, e, g.x, g.y);
        };
        const std::vector<double> fd = finite_diff_grad(loss, point, 1e-5);
        std::vector<double> a = an.d_w;
        a.insert(a.end(), an.d_theta.begin(), an.d_theta.end());
        rel[i] = dist2(a, fd) / std::max({norm2(a), norm2(fd), 1e-8});
    });
    for (std::size_t i = 0; i < rel.size(); ++i) rep.add_le(idx("relative_error", i), rel[i], 1e-4);
    return rep;
}

// ---------------------------------------------------------------- projections

bool feasible(const std::vector<double>& p, double alpha) {
    double s = 0.0, q = 0.0;
    for (double v : p) {
        if (v < 0.0) return false;
        s += v;
        q += v * v;
    }
    return s <= 1.0 && q <= alpha;
}

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

// visits base + step * offset for every offset in [lo, hi]^dim
void scan(const std::vector<double>& base, double step, int lo, int hi,
          const std::function<void(const std::vector<double>&, const std::vector<int>&)>& visit) {
    const std::size_t dim = base.size();
    std::vector<int> off(dim, lo);
    std::vector<double> p(dim);
    while (true) {
        for (std::size_t k = 0; k < dim; ++k) p[k] = base[k] + step * off[k];
        visit(p, off);
        std::size_t k = 0;
        while (k < dim && off[k] == hi) off[k++] = lo;
        if (k == dim) break;
        ++off[k];
    }
}

VerifyReport suite_projections(const VerifyOptions& opt) {
    VerifyReport rep;
    rep.suite = "projections";
    struct Case {
        std::vector<double> y, y2;
        double alpha;
    };
    Rng rng(substream_seed(opt.seed, 2));
    std::vector<Case> cases;
    for (int i = 0; i < 100; ++i) {
        Case c;
        const int dim = uniform_int(rng, 1, 3);
        for (int k = 0; k < dim; ++k) c.y.push_back(uniform(rng, -0.5, 1.5));
        for (int k = 0; k < dim; ++k) c.y2.push_back(uniform(rng, -0.5, 1.5));
        c.alpha = uniform(rng, 0.05, 1.0);
        cases.push_back(std::move(c));
    }
    struct Out {
        double dist = 0, violation = 0, grid_gap = 0, idem = 0, expand = 0;
    };
    std::vector<Out> out(cases.size());
    parallel_for(cases.size(), opt.threads, [&](std::size_t i) {
        const Case& c = cases[i];
        const std::vector<double> p = project_A(c.y, c.alpha);
        const std::vector<double> coarse = grid_projection(c.y, c.alpha, 0.005, 0);
        const std::vector<double> fine = grid_projection(c.y, c.alpha, 0.005, 4);
        Out& o = out[i];
        o.dist = dist2(p, fine);
        double s = 0.0, q = 0.0, neg = 0.0;
        for (double v : p) {
            s += v;
            q += v * v;
            neg = std::max(neg, -v);
        }
        o.violation = std::max({neg, s - 1.0, q - c.alpha, 0.0});
        o.grid_gap = sqdist(p, c.y) - sqdist(coarse, c.y);
        o.idem = dist2(project_A(p, c.alpha), p);
        o.expand = dist2(p, project_A(c.y2, c.alpha)) - dist2(c.y, c.y2);
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
        rep.add_le(idx("distance_to_grid_optimum", i), out[i].dist, 1e-3);
        rep.add(idx("feasibility_violation", i), out[i].violation, 0.0, out[i].violation == 0.0);
        rep.add_le(idx("objective_minus_grid_objective", i), out[i].grid_gap, 1e-12);
        rep.add_le(idx("idempotence", i), out[i].idem, 1e-10);
        rep.add_le(idx("expansion", i), out[i].expand, 1e-10);
    }
    return rep;
}

// ---------------------------------------------------------------- descent inequality

VerifyReport suite_lemma1(const VerifyOptions& opt) {
    VerifyReport rep;
    rep.suite = "lemma1";
    std::vector<Lemma1Result> res(50);
    parallel_for(res.size(), opt.threads, [&](std::size_t i) {
        Rng rng(substream_seed(opt.seed ^ 0x13u, i));
        const double alpha = uniform(rng, 0.1, 1.0);
        res[i] = lemma1_check(random_quadratic_problem(5, 3, 200, alpha, rng));
    });
    for (std::size_t i = 0; i < res.size(); ++i)
        rep.add_le(idx("lhs_minus_rhs", i), res[i].lhs - res[i].rhs, 1e-9);
    return rep;
}

// ---------------------------------------------------------------- gadgets

double dist_to_faces(const std::vector<double>& x, const std::vector<double>& a, const std::vector<double>& b) {
    double d = 1e300;
    for (std::size_t i = 0; i < x.size(); ++i) d = std::min({d, std::abs(x[i] - a[i]), std::abs(x[i] - b[i])});
    return d;
}

bool in_box(const std::vector<double>& x, const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= a[i] && x[i] < b[i])) return false;
    return true;
}

VerifyReport suite_gadgets(const VerifyOptions& opt) {
    VerifyReport rep;
    rep.suite = "gadgets";
    Rng rng(substream_seed(opt.seed, 4));
    const int G = 10000;
    for (int R = 2; R <= 8; ++R) {
        for (double a : {1.0, 2.0}) {
            const std::string tag = "_R" + std::to_string(R) + "_a" + std::to_string(static_cast<int>(a));
            const FeedForwardNet sq = build_square_net(R, a);
            double err = 0.0;
            for (int i = 0; i < G; ++i) {
                const double x = -a + 2.0 * a * i / (G - 1);
                err = std::max(err, std::abs(eval_ffnet(sq, {x}) - x * x));
            }
            rep.add_le("square_error" + tag, err, square_error_bound(R, a) * (1.0 + 1e-12));
            const WeightStats ss = net_weight_stats(sq);
            rep.add_le("square_sup" + tag, ss.sup_norm, square_weight_bound(a));
            rep.add_le("square_input_layer_sup" + tag, ss.input_layer_sup, 1.0);

            const FeedForwardNet mu = build_mult_net(R, a);
            double merr = 0.0;
            for (int i = 0; i < G; ++i) {
                const double x = uniform(rng, -a, a), y = uniform(rng, -a, a);
                merr = std::max(merr, std::abs(eval_ffnet(mu, {x, y}) - x * y));
            }
            rep.add_le("mult_error" + tag, merr, mult_error_bound(R, a) * (1.0 + 1e-12));
            const WeightStats ms = net_weight_stats(mu);
            rep.add_le("mult_sup" + tag, ms.sup_norm, mult_weight_bound(a));
            rep.add("mult_output_offset" + tag, ms.output_offset, 0.0, ms.output_offset == 0.0);
        }
        // the [0,1] interpolant is exact on dyadic points and worst at the first midpoint
        const FeedForwardNet s01 = build_square01_net(R);
        double derr = 0.0;
        for (int k = 0; k <= (1 << R); ++k) {
            const double x = std::ldexp(k, -R);
            derr = std::max(derr, std::abs(eval_ffnet(s01, {x}) - x * x));
        }
        rep.add_le("square01_dyadic_error_R" + std::to_string(R), derr, 1e-12);
        const double mid = std::ldexp(1.0, -R - 1);
        rep.add_le("square01_midpoint_R" + std::to_string(R),
                   std::abs(eval_ffnet(s01, {mid}) - mid * mid - std::ldexp(1.0, -2 * R - 2)), 1e-12);

        for (int d = 1; d <= 2; ++d) {
            const std::string tag = "_R" + std::to_string(R) + "_d" + std::to_string(d);
            std::vector<double> lo(d), hi(d);
            for (int k = 0; k < d; ++k) {
                lo[k] = uniform(rng, -1.0, 0.0);
                hi[k] = lo[k] + uniform(rng, 2.0 / R, 2.0);
            }
            const double s = uniform(rng, -static_cast<double>(R), static_cast<double>(R));
            const FeedForwardNet ind = build_indicator_net(lo, hi, R);
            const FeedForwardNet tst = build_test_net(lo, hi, s, R);
            double exact_ind = 0.0, exact_tst = 0.0, dev_ind = 0.0, dev_tst = 0.0;
            for (int i = 0; i < 2000; ++i) {
                std::vector<double> x(d);
                for (auto& v : x) v = uniform(rng, -2.0, 2.0);
                const double target = in_box(x, lo, hi) ? 1.0 : 0.0;
                const double vi = eval_ffnet(ind, x), vt = eval_ffnet(tst, x);
                if (dist_to_faces(x, lo, hi) >= 1.0 / R) {
                    exact_ind = std::max(exact_ind, std::abs(vi - target));
                    exact_tst = std::max(exact_tst, std::abs(vt - s * target));
                } else {
                    dev_ind = std::max(dev_ind, std::abs(vi - target));
                    dev_tst = std::max(dev_tst, std::abs(vt - s * target) - std::abs(s));
                }
            }
            rep.add_le("indicator_exact" + tag, exact_ind, 1e-12);
            rep.add_le("indicator_deviation" + tag, dev_ind, 1.0);
            rep.add_le("test_exact" + tag, exact_tst, 1e-12 * std::max(1.0, std::abs(s)));
            rep.add_le("test_excess_deviation" + tag, dev_tst, 1e-12 * std::max(1.0, std::abs(s)));
            rep.add_le("indicator_sup" + tag, net_weight_stats(ind).sup_norm, indicator_weight_bound(lo, hi, R));
            rep.add_le("test_sup" + tag, net_weight_stats(build_test_net(d, R)).sup_norm, test_weight_bound(R));
        }
        for (int B = 1; B <= 5; ++B) {
            const std::string tag = "_R" + std::to_string(R) + "_B" + std::to_string(B);
            const FeedForwardNet tr = build_trunc_net(R, B);
            double err = 0.0;
            for (int i = 0; i < (B + 1) * 1000; ++i) {
                const double z = i * 1e-3;
                const double frac = z - std::floor(z);
                if (std::min(frac, 1.0 - frac) < 1.0 / R) continue;
                err = std::max(err, std::abs(eval_ffnet(tr, {z}) - std::floor(z)));
            }
            rep.add_le("trunc_floor" + tag, err, 1e-12);
            const WeightStats ts = net_weight_stats(tr);
            rep.add_le("trunc_sup" + tag, ts.sup_norm, trunc_weight_bound(R, B));
            rep.add("trunc_input_weights_unit" + tag, ts.input_weight_sup, 1.0,
                    tr.layers.front().W.cwiseAbs().minCoeff() == 1.0 && ts.input_weight_sup == 1.0);
            rep.add("trunc_output_offset" + tag, ts.output_offset, 0.0, ts.output_offset == 0.0);
        }
    }
    {
        const FeedForwardNet m3 = build_multd_net(12, 3, 1.0);
        double err = 0.0;
        for (int i = 0; i < G; ++i) {
            const double x = uniform(rng, -1, 1), y = uniform(rng, -1, 1), z = uniform(rng, -1, 1);
            err = std::max(err, std::abs(eval_ffnet(m3, {x, y, z}) - x * y * z));
        }
        rep.add_le("multd3_error_bound", err, multd_error_bound(12, 3, 1.0));
        rep.add_le("multd3_error_floor", err, 1e-2);
        rep.add_le("multd3_sup", net_weight_stats(m3).sup_norm, multd_weight_bound(3, 1.0));
        rep.add("multd3_ones", std::abs(eval_ffnet(m3, {1, 1, 1}) - 1.0), multd_error_bound(12, 3, 1.0),
                std::abs(eval_ffnet(m3, {1, 1, 1}) - 1.0) <= multd_error_bound(12, 3, 1.0));
        bool threw = false;
        try {
            build_multd_net(5, 3, 1.0);
        } catch (const DomainError&) {
            threw = true;
        }
        rep.add("multd_depth_precondition", threw ? 1.0 : 0.0, 1.0, threw);
    }
    {
        // y2 * x through the polynomial net against the product net
        const int R = 12;
        const std::vector<double> r{0.0, 1.0};
        const FeedForwardNet poly = build_poly_net(R, 1, 1, r, 1.0);
        const FeedForwardNet mu = build_mult_net(R, 1.0);
        double diff = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double x = uniform(rng, -1, 1), y = uniform(rng, -1, 1);
            diff = std::max(diff, std::abs(eval_ffnet(poly, {x, 0.0, y}) - eval_ffnet(mu, {x, y})));
        }
        rep.add_le("poly_vs_mult", diff, poly_error_bound(R, 1, 1, r, 1.0) + mult_error_bound(R, 1.0));
        rep.add_le("poly_sup", net_weight_stats(poly).sup_norm, poly_weight_bound(1, r, 1.0));
        const std::vector<double> rc{0.7, 0.0};
        const FeedForwardNet cpoly = build_poly_net(R, 1, 1, rc, 1.0);
        double cerr = 0.0;
        for (int i = 0; i < 1000; ++i) cerr = std::max(cerr, std::abs(eval_ffnet(cpoly, {uniform(rng, -1, 1), 1.0, 0.0}) - 0.7));
        rep.add_le("poly_constant", cerr, poly_error_bound(R, 1, 1, rc, 1.0));
    }
    {
        // composition: depths add, case (c) sup bound, associativity
        const FeedForwardNet f0 = identity_net(2, 2);
        const FeedForwardNet g1 = build_square01_net(3), g2 = deepen(build_tooth_net(), 3);
        const FeedForwardNet comp = compose_nets(f0, {g1, g2});
        rep.add("compose_depth", comp.depth(), f0.depth() + g1.depth(), comp.depth() == f0.depth() + g1.depth());
        const CompositionBounds cb = composition_bounds(f0, {g1, g2});
        const WeightStats cs = net_weight_stats(comp);
        rep.add_le("compose_case_a", cs.sup_norm, cb.case_a);
        if (cb.c_applies) rep.add_le("compose_case_c", cs.sup_norm, cb.case_c);
        const FeedForwardNet h = affine_net((Mat(1, 1) << 0.5).finished(), (VecX(1) << 0.25).finished());
        const FeedForwardNet left = compose(compose(build_square_net(3, 1.0), build_tooth_net()), h);
        const FeedForwardNet right = compose(build_square_net(3, 1.0), compose(build_tooth_net(), h));
        double assoc = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double x = uniform(rng, -1, 1);
            assoc = std::max(assoc, std::abs(eval_ffnet(left, {x}) - eval_ffnet(right, {x})));
        }
        rep.add_le("compose_associativity", assoc, 1e-12);
    }
    return rep;
}

// ---------------------------------------------------------------- taylor

double sin_derivative(const std::vector<double>& x, const std::vector<int>& l) {
    switch (l[0] % 4) {
        case 0: return std::sin(x[0]);
        case 1: return std::cos(x[0]);
        case 2: return -std::sin(x[0]);
        default: return -std::cos(x[0]);
    }
}

VerifyReport suite_taylor(const VerifyOptions& opt) {
    VerifyReport rep;
    rep.suite = "taylor";
    const std::vector<int> Ms{2, 3, 4};
    std::vector<double> sup_err(Ms.size());
    std::vector<TaylorNet> nets(Ms.size());
    parallel_for(Ms.size(), opt.threads, [&](std::size_t m) {
        TaylorConfig cfg;
        cfg.d = 1;
        cfg.q = 1;
        cfg.p = 2.0;
        cfg.C = 1.0;
        cfg.M = Ms[m];
        cfg.derivative = sin_derivative;
        nets[m] = build_taylor_net(cfg);
    });
    for (std::size_t m = 0; m < Ms.size(); ++m) {
        const TaylorNet& T = nets[m];
        const std::string tag = "_M" + std::to_string(Ms[m]);
        const double margin = 2.0 * T.delta;
        double net_vs_rec = 0.0, net_vs_direct = 0.0, rec_vs_direct = 0.0, err = 0.0;
        const int P = 4000;
        for (int i = 0; i < P; ++i) {
            const std::vector<double> x{-1.0 + 2.0 * (i + 0.5) / P};
            if (T.boundary_distance(x) < margin) continue;
            const double net = eval_ffnet(T.deep, x), rec = T.recursion(x), dir = T.direct(x);
            net_vs_rec = std::max(net_vs_rec, std::abs(net - rec));
            net_vs_direct = std::max(net_vs_direct, std::abs(net - dir));
            rec_vs_direct = std::max(rec_vs_direct, std::abs(rec - dir));
            err = std::max(err, std::abs(net - std::sin(x[0])));
        }
        rep.add_le("net_vs_recursion" + tag, net_vs_rec, 1e-6);
        rep.add_le("net_vs_direct" + tag, net_vs_direct, 1e-6);
        rep.add_le("recursion_vs_direct" + tag, rec_vs_direct, 1e-9);
        rep.add("interior_sup_error" + tag, err, 0.0, true);
        rep.add("weight_certificate_c" + tag, T.certificate_c, 0.0, true);
        rep.add("size_condition_holds" + tag, T.size.holds ? 1.0 : 0.0, 0.0, true);
        sup_err[m] = err;
    }
    for (std::size_t m = 1; m < Ms.size(); ++m)
        rep.add("interior_error_decreases_M" + std::to_string(Ms[m]), sup_err[m], sup_err[m - 1],
                sup_err[m] < sup_err[m - 1]);
    // digit codes round trip
    Rng rng(substream_seed(opt.seed, 5));
    for (int d = 1; d <= 2; ++d) {
        const int ce = static_cast<int>(std::ceil(std::exp(static_cast<double>(d))));
        int bad = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const int count = uniform_int(rng, 1, d == 1 ? 15 : 8);
            std::vector<int> b(count);
            for (auto& v : b) v = uniform_int(rng, -(ce + 1), ce + 1);
            if (decode_digits(encode_digits(b, ce), count, ce) != b) ++bad;
        }
        rep.add("digit_round_trip_d" + std::to_string(d), bad, 0.0, bad == 0);
    }
    return rep;
}

// ---------------------------------------------------------------- embedding

FeedForwardNet random_node_net(int depth, int width, Rng& rng) {
    FeedForwardNet n;
    n.input_dim = 4;
    int in = 4;
    for (int l = 0; l <= depth; ++l) {
        const int out = l == depth ? 1 : width;
        Mat W(out, in);
        VecX b(out);
        for (int i = 0; i < out; ++i) {
            for (int j = 0; j < in; ++j) W(i, j) = uniform(rng, -1.0, 1.0);
            b(i) = uniform(rng, -0.5, 0.5);
        }
        n.layers.push_back({W, b});
        in = out;
    }
    return n;
}

VerifyReport suite_embedding(const VerifyOptions& opt) {
    VerifyReport rep;
    rep.suite = "embedding";
    Rng rng(substream_seed(opt.seed, 6));
    {
        const EmbeddedCnn e = cnn_from_ffnets({{mean4_net()}}, 1);
        rep.add("channels_level1", e.config.channels[0], 4 + e.node_width, e.config.channels[0] == 4 + e.node_width);
        const HierarchicalModel model = HierarchicalModel::uniform(1, Node::mean());
        double err = 0.0;
        for (int i = 0; i < 100; ++i) {
            const ImageGrid x = random_image(4, 4, rng);
            err = std::max(err, std::abs(cnn_value(e.config, e.params, x) - eval_maxpool_model(model, x)));
        }
        rep.add_le("mean_level1_vs_model", err, 1e-9);
        const ImageGrid c = ImageGrid::filled(4, 4, 0.3);
        rep.add_le("constant_image", std::abs(cnn_value(e.config, e.params, c) - 0.3), 1e-9);
    }
    for (int level = 1; level <= 2; ++level) {
        std::vector<std::vector<FeedForwardNet>> g(level);
        for (int k = 1; k <= level; ++k)
            for (int s = 0; s < 1 << (2 * (level - k)); ++s) g[k - 1].push_back(random_node_net(2, 3, rng));
        const EmbeddedCnn e = cnn_from_ffnets(g, level);
        const int side = level == 1 ? 4 : 6;
        double err = 0.0;
        for (int i = 0; i < 100; ++i) {
            const ImageGrid x = random_image(side, side, rng);
            err = std::max(err, std::abs(cnn_value(e.config, e.params, x) - eval_ffnet_hierarchy(g, level, x)));
        }
        rep.add_le("random_nets_level" + std::to_string(level), err, 1e-9);
        const int expected_depth = ((1 << (2 * level)) - 1) / 3 * 2 + level;
        rep.add("depth_level" + std::to_string(level), e.config.L1, expected_depth, e.config.L1 == expected_depth);
    }
    return rep;
}

// ---------------------------------------------------------------- bounds

VerifyReport suite_bounds(const VerifyOptions& opt) {
    VerifyReport rep;
    rep.suite = "bounds";
    Rng rng(substream_seed(opt.seed, 7));
    auto tiny = [&](int d) {
        CnnConfig cfg;
        cfg.L1 = uniform_int(rng, 1, 2);
        for (int r = 0; r < cfg.L1; ++r) {
            cfg.channels.push_back(uniform_int(rng, 1, 2));
            cfg.filter_sizes.push_back(uniform_int(rng, 1, 2));
        }
        cfg.L2 = uniform_int(rng, 1, 2);
        (void)d;
        return cfg;
    };
    for (int i = 0; i < 50; ++i) {
        const int d = uniform_int(rng, 3, 5);
        CnnConfig cfg = tiny(d);
        const double B = uniform_int(rng, 1, 2);
        const CnnParams th = random_params(cfg, B, rng);
        CnnParams tb = th;
        const double r = uniform(rng, 0.05, 1.0);
        for (auto& v : tb.flat) v = std::clamp(v + r * uniform(rng, -1.0, 1.0), -B, B);
        std::vector<ImageGrid> imgs;
        for (int k = 0; k < 20; ++k) imgs.push_back(random_image(d, d, rng));
        BoundReport br{"lipschitz", lipschitz_bound(cfg, B), empirical_lipschitz(cfg, th, tb, imgs)};
        rep.add_le(idx("lipschitz_ratio_minus_bound", i), -*br.margin(), 0.0);
    }
    for (int i = 0; i < 50; ++i) {
        const int d = uniform_int(rng, 3, 5);
        CnnConfig cfg = tiny(d);
        const double B = uniform_int(rng, 1, 2);
        cfg.beta = uniform(rng, 0.5, 3.0);
        const int K = uniform_int(rng, 1, 3);
        EnsembleParams ens;
        std::vector<double> w(K);
        for (auto& v : w) v = uniform(rng, 0.0, 1.0);
        ens.w = project_A(w, uniform(rng, 0.1, 1.0));
        for (int k = 0; k < K; ++k) ens.thetas.push_back(random_params(cfg, B, rng));
        ens.theta0 = ens.thetas;
        const ImageGrid x = random_image(d, d, rng);
        const GradBundle g = grad_ensemble(cfg, ens, x, uniform(rng, 0, 1) < 0.5 ? -1 : 1);
        double sup = 0.0;
        for (double v : g.d_theta) sup = std::max(sup, std::abs(v));
        BoundReport br{"gradient", grad_sup_bound(cfg, B), sup};
        rep.add_le(idx("gradient_sup_minus_bound", i), -*br.margin(), 0.0);
    }
    return rep;
}

// ---------------------------------------------------------------- rademacher

VerifyReport suite_rademacher(const VerifyOptions& opt) {
    VerifyReport rep;
    rep.suite = "rademacher";
    CnnConfig cfg;
    cfg.L1 = 1;
    cfg.channels = {2};
    cfg.filter_sizes = {2};
    cfg.L2 = 2;
    RademacherConfig rc;
    rc.B = 1.0;
    rc.beta = 1.0;
    rc.trials = 20;
    rc.restarts = 8;
    rc.climb_steps = 60;
    rc.seed = substream_seed(opt.seed, 8);
    rc.threads = opt.threads;
    auto images = [&](int n, std::uint64_t stream) {
        Rng rng(substream_seed(opt.seed, stream));
        std::vector<ImageGrid> out;
        for (int i = 0; i < n; ++i) out.push_back(random_image(4, 4, rng));
        return out;
    };
    const RademacherEstimate small = rademacher_mc(cfg, images(1024, 81), rc);
    const RademacherEstimate large = rademacher_mc(cfg, images(4096, 82), rc);
    const double ratio = large.mean / small.mean;
    rep.add("estimate_n1024", small.mean, rc.beta, small.mean >= 0.0 && small.mean <= rc.beta);
    rep.add("estimate_n4096", large.mean, rc.beta, large.mean >= 0.0 && large.mean <= rc.beta);
    rep.add("ratio_4096_over_1024", ratio, 0.8, ratio >= 0.3 && ratio <= 0.8);
    RademacherConfig zero = rc;
    zero.beta = 0.0;
    zero.trials = 2;
    const double zero_mean = rademacher_mc(cfg, images(64, 83), zero).mean;
    rep.add("zero_truncation", zero_mean, 0.0, zero_mean == 0.0);
    return rep;
}

}  // namespace

std::vector<double> grid_projection(const std::vector<double>& y, double alpha, double step, int levels) {
    const std::size_t dim = y.size();
    if (alpha <= 0.0) return std::vector<double>(dim, 0.0);
    const double cap = std::min(1.0, std::sqrt(alpha));
    const int top = static_cast<int>(std::floor(cap / step + 1e-9));
    std::vector<double> best(dim, 0.0);
    double best_val = sqdist(best, y);
    scan(std::vector<double>(dim, 0.0), step, 0, top, [&](const std::vector<double>& p, const std::vector<int>&) {
        if (!feasible(p, alpha)) return;
        const double v = sqdist(p, y);
        if (v < best_val) {
            best_val = v;
            best = p;
        }
    });
    // Refinement works on retracted points: clamp to the orthant, then scale towards the origin until
    // both the mass and the norm constraint hold. Every boundary point is reached this way, so the
    // local grids are not biased towards grid points that happen to sit near a curved face.
    auto retract = [&](std::vector<double> p) {
        double mass = 0.0, sq = 0.0;
        for (double& v : p) {
            v = std::max(0.0, v);
            mass += v;
            sq += v * v;
        }
        const double f = std::max({1.0, mass, std::sqrt(sq / alpha)});
        if (f > 1.0)
            for (double& v : p) v /= f;
        // a rounding excess is removed coordinate by coordinate
        while (!feasible(p, alpha))
            for (double& v : p) v = std::nextafter(v, 0.0);
        return p;
    };
    const int W = 20;
    double s = step;
    for (int level = 0; level < levels; ++level) {
        s /= 10.0;
        for (int recentre = 0; recentre < 200; ++recentre) {
            const std::vector<double> centre = best;
            bool on_edge = false;
            scan(centre, s, -W, W, [&](const std::vector<double>& raw, const std::vector<int>& off) {
                const std::vector<double> p = retract(raw);
                const double v = sqdist(p, y);
                if (v < best_val) {
                    best_val = v;
                    best = p;
                    on_edge = std::any_of(off.begin(), off.end(), [&](int o) { return std::abs(o) == W; });
                }
            });
            if (!on_edge) break;
        }
    }
    return best;
}

const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> names{"gadgets", "gradients", "projections", "bounds",
                                                "lemma1",  "taylor",    "embedding",   "rademacher"};
    return names;
}

VerifyReport run_verify(const std::string& suite, const VerifyOptions& opt) {
    if (suite == "gadgets") return suite_gadgets(opt);
    if (suite == "gradients") return suite_gradients(opt);
    if (suite == "projections") return suite_projections(opt);
    if (suite == "bounds") return suite_bounds(opt);
    if (suite == "lemma1") return suite_lemma1(opt);
    if (suite == "taylor") return suite_taylor(opt);
    if (suite == "embedding") return suite_embedding(opt);
    if (suite == "rademacher") return suite_rademacher(opt);
    throw ConfigError("unknown verify suite '" + suite + "'");
}

}  // namespace cnnsgd
