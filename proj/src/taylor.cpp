#include "cnnsgd/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "cnnsgd/gadgets.hpp"

namespace cnnsgd {

namespace {

double multi_factorial(const std::vector<int>& l) {
    double f = 1.0;
    for (int e : l)
        for (int k = 2; k <= e; ++k) f *= k;
    return f;
}

double multi_pow(const std::vector<double>& v, const std::vector<int>& l) {
    double r = 1.0;
    for (std::size_t i = 0; i < l.size(); ++i) r *= std::pow(v[i], l[i]);
    return r;
}

int order(const std::vector<int>& l) {
    int s = 0;
    for (int e : l) s += e;
    return s;
}

struct MultiIndex {
    std::vector<std::vector<int>> list;
    std::map<std::vector<int>, int> pos;

    MultiIndex(int d, int q) : list(graded_lex_monomials(d, q)) {
        for (std::size_t i = 0; i < list.size(); ++i) pos[list[i]] = static_cast<int>(i);
    }
    int size() const { return static_cast<int>(list.size()); }
};

// out_l = sum_s vals_{l+s} v^s / s!
std::vector<double> taylor_shift(const MultiIndex& mi, int q, const std::vector<double>& vals,
                                 const std::vector<double>& v) {
    std::vector<double> out(vals.size(), 0.0);
    for (int i = 0; i < mi.size(); ++i) {
        const auto& l = mi.list[i];
        for (int j = 0; j < mi.size(); ++j) {
            const auto& s = mi.list[j];
            if (order(l) + order(s) > q) continue;
            std::vector<int> ls(l.size());
            for (std::size_t k = 0; k < l.size(); ++k) ls[k] = l[k] + s[k];
            out[i] += vals[mi.pos.at(ls)] * multi_pow(v, s) / multi_factorial(s);
        }
    }
    return out;
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

bool in_box(const std::vector<double>& x, const std::vector<double>& lo, double side) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= lo[i] && x[i] < lo[i] + side)) return false;
    return true;
}

// depth-2 stage: new_state = carry * state + terms_out * terms(state) + bias
FeedForwardNet build_stage(int S, const std::vector<FeedForwardNet>& terms, const Mat& carry, const Mat& terms_out,
                           const VecX& bias) {
    std::vector<FeedForwardNet> parts{identity_net(S, 2)};
    parts.insert(parts.end(), terms.begin(), terms.end());
    Mat out(S, S + static_cast<Eigen::Index>(terms.size()));
    out << carry, terms_out;
    return compose(affine_net(out, bias), parallel(parts));
}

FeedForwardNet select_x(int S, int d, int x0) {
    Mat A = Mat::Zero(d, S);
    for (int k = 0; k < d; ++k) A(k, x0 + k) = 1.0;
    return affine_net(A, VecX::Zero(d));
}

FeedForwardNet indicator_term(int S, int d, int x0, const std::vector<double>& lo, const std::vector<double>& hi,
                              double R) {
    return compose(build_indicator_net(lo, hi, R), select_x(S, d, x0));
}

// s * 1[phi2 + lo_off, phi2 + hi_off)(x), with s = state[s_idx] (or s_const when s_idx < 0)
FeedForwardNet test_term(int S, int d, double R, int x0, int phi0, const std::vector<double>& lo_off,
                         const std::vector<double>& hi_off, int s_idx, double s_const) {
    Mat A = Mat::Zero(3 * d + 1, S);
    VecX c = VecX::Zero(3 * d + 1);
    for (int k = 0; k < d; ++k) {
        A(k, x0 + k) = 1.0;
        A(d + k, phi0 + k) = 1.0;
        c(d + k) = lo_off[k];
        A(2 * d + k, phi0 + k) = 1.0;
        c(2 * d + k) = hi_off[k];
    }
    if (s_idx >= 0)
        A(3 * d, s_idx) = 1.0;
    else
        c(3 * d) = s_const;
    return compose(build_test_net(d, R), affine_net(A, c));
}

FeedForwardNet embed_input(int S, int d) {
    Mat A = Mat::Zero(S, d);
    for (int k = 0; k < d; ++k) A(k, k) = 1.0;
    return affine_net(A, VecX::Zero(S));
}

void fail_scale(const std::string& why) { throw DomainError("unsupported scale: " + why); }

}  // namespace

void TaylorConfig::validate() const {
    if (d < 1 || d > 2) fail_scale("d must be 1 or 2");
    if (q < 0 || q > 2) fail_scale("q must be at most 2");
    if (M < 2 || M > 4) fail_scale("M must lie in 2..4");
    if (!(a >= 1.0)) throw DomainError("taylor net needs a >= 1");
    if (!(p > q && p <= q + 1)) throw DomainError("taylor net needs q < p <= q + 1");
    if (!(C > 0.0)) throw DomainError("taylor net needs C > 0");
    if (!derivative) throw ConfigError("taylor net needs a derivative oracle");
    const int ce = static_cast<int>(std::ceil(std::exp(static_cast<double>(d))));
    const double base = 4.0 + 2.0 * ce;
    const int cells = static_cast<int>(std::lround(std::pow(M, d)));
    // digit decoding multiplies by base^(M^d - 1); keep that well inside double precision
    if (2.0 * std::pow(base, cells - 1) > std::ldexp(1.0, 40))
        fail_scale("digit code needs " + std::to_string(cells - 1) + " base-" + std::to_string(static_cast<int>(base)) +
                   " digits, beyond double precision");
}

TaylorSizeCheck taylor_size_check(const TaylorConfig& cfg) {
    TaylorSizeCheck s;
    const int ce = static_cast<int>(std::ceil(std::exp(static_cast<double>(cfg.d))));
    const double c36 = cfg.C * std::pow(cfg.d, cfg.p);
    const double c37 = 1.0;
    s.lhs = std::pow(cfg.M, 2.0 * cfg.p);
    const double e4 = 4.0 * (cfg.q + 1);
    s.rhs = std::pow(2.0, e4 + 1) * std::max(c37 * std::pow(6.0 + 2 * ce, e4), c36 * std::exp(cfg.d)) *
            std::pow(std::max(cfg.a, cfg.f_norm), e4);
    s.holds = s.lhs >= s.rhs;
    std::ostringstream os;
    os << "size condition " << (s.holds ? "holds" : "unmet") << ": M^(2p) = " << s.lhs << ", required " << s.rhs;
    s.message = os.str();
    return s;
}

double encode_digits(const std::vector<int>& digits, int ce) {
    const double base = 4.0 + 2.0 * ce;
    double code = 0.0, scale = 1.0;
    for (int b : digits) {
        if (std::abs(b) > ce + 1) throw DomainError("digit out of range");
        scale /= base;
        code += (b + ce + 2) * scale;
    }
    // half a unit in the last place keeps every partial product away from integers
    return code + 0.5 * scale;
}

std::vector<int> decode_digits(double code, int count, int ce) {
    const double base = 4.0 + 2.0 * ce;
    std::vector<int> out;
    double z = code;
    for (int k = 0; k < count; ++k) {
        const double t = base * z;
        const double D = std::floor(t);
        out.push_back(static_cast<int>(D) - ce - 2);
        z = t - D;
    }
    return out;
}

double TaylorNet::recursion(const std::vector<double>& x) const {
    const int d = cfg.d, S = static_cast<int>(coarse_left.size()), D = static_cast<int>(multi.size());
    const MultiIndex mi(d, cfg.q);
    std::vector<double> phi2(d, 0.0), phi3(D, 0.0), phi4(D, 0.0), phi5(d, 0.0), phi6(D, 0.0);
    const double side = 2.0 * cfg.a / cfg.M;
    for (int j = 0; j < S; ++j) {
        if (!in_box(x, coarse_left[j], side)) continue;
        for (int k = 0; k < d; ++k) phi2[k] += coarse_left[j][k];
        for (int i = 0; i < D; ++i) {
            phi3[i] += cfg.derivative(coarse_left[j], multi[i]);
            phi4[i] += codes[j][i];
        }
    }
    for (int j = 1; j <= S; ++j) {
        if (in_box(x, phi2, h)) {
            phi5 = add(phi5, phi2);
            phi6 = add(phi6, phi3);
        }
        if (j == S) break;
        std::vector<double> step(d);
        for (int k = 0; k < d; ++k) step[k] = sub_offset[j][k] - sub_offset[j - 1][k];
        std::vector<double> next = taylor_shift(mi, cfg.q, phi3, step);
        for (int i = 0; i < D; ++i) {
            const double t = base * phi4[i];
            const double digit = std::floor(t);
            next[i] += (digit - ce - 2) * c36 * std::pow(h, cfg.p - order(multi[i]));
            phi4[i] = t - digit;
        }
        phi3 = next;
        phi2 = add(phi2, step);
    }
    double out = 0.0;
    std::vector<double> diff(d);
    for (int k = 0; k < d; ++k) diff[k] = x[k] - phi5[k];
    for (int i = 0; i < D; ++i) out += phi6[i] / multi_factorial(multi[i]) * multi_pow(diff, multi[i]);
    return out;
}

double TaylorNet::direct(const std::vector<double>& x) const {
    const int d = cfg.d, M = cfg.M, D = static_cast<int>(multi.size());
    const MultiIndex mi(d, cfg.q);
    const double side = 2.0 * cfg.a / M;
    int cell = 0, stride = 1;
    std::vector<int> local(d);
    for (int k = 0; k < d; ++k) {
        const int ck = std::clamp(static_cast<int>(std::floor((x[k] + cfg.a) / side)), 0, M - 1);
        cell += ck * stride;
        stride *= M;
        const double left = -cfg.a + ck * side;
        local[k] = std::clamp(static_cast<int>(std::floor((x[k] - left) / h)), 0, M - 1);
    }
    int sub = local[0];
    if (d == 2) sub = local[1] * M + (local[1] % 2 == 0 ? local[0] : M - 1 - local[0]);

    std::vector<double> fh(D);
    for (int i = 0; i < D; ++i) fh[i] = cfg.derivative(coarse_left[cell], multi[i]);
    for (int k = 1; k <= sub; ++k) {
        std::vector<double> step(d);
        for (int c = 0; c < d; ++c) step[c] = sub_offset[k][c] - sub_offset[k - 1][c];
        fh = taylor_shift(mi, cfg.q, fh, step);
        for (int i = 0; i < D; ++i) fh[i] += digits[cell][i][k - 1] * c36 * std::pow(h, cfg.p - order(multi[i]));
    }
    std::vector<double> diff(d);
    for (int k = 0; k < d; ++k) diff[k] = x[k] - (coarse_left[cell][k] + sub_offset[sub][k]);
    double out = 0.0;
    for (int i = 0; i < D; ++i) out += fh[i] / multi_factorial(multi[i]) * multi_pow(diff, multi[i]);
    return out;
}

double TaylorNet::weight_exact(const std::vector<double>& x) const {
    double w = 1.0;
    for (int k = 0; k < cfg.d; ++k) {
        const double corner = -cfg.a + h * std::floor((x[k] + cfg.a) / h);
        const double u = (x[k] - corner) * 2.0 / h;
        w *= std::max(0.0, 1.0 - std::abs(1.0 - u));
    }
    return w;
}

double TaylorNet::boundary_distance(const std::vector<double>& x) const {
    double dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.d; ++k) {
        const double t = (x[k] + cfg.a) / h;
        const double frac = t - std::floor(t);
        dist = std::min(dist, std::min(frac, 1.0 - frac) * h);
    }
    return dist;
}

TaylorNet build_taylor_net(const TaylorConfig& cfg_in) {
    cfg_in.validate();
    TaylorNet T;
    T.cfg = cfg_in;
    const TaylorConfig& cfg = T.cfg;
    const int d = cfg.d, M = cfg.M, q = cfg.q;
    const MultiIndex mi(d, q);
    const int D = mi.size();
    T.multi = mi.list;
    T.ce = static_cast<int>(std::ceil(std::exp(static_cast<double>(d))));
    T.base = 4 + 2 * T.ce;
    T.h = 2.0 * cfg.a / (M * M);
    T.c36 = cfg.C * std::pow(d, cfg.p);
    const double R_ind = std::pow(M, 2.0 * cfg.p + 2.0);
    T.delta = 1.0 / R_ind;
    const int S = static_cast<int>(std::lround(std::pow(M, d)));
    const double side = 2.0 * cfg.a / M;

    for (int k = 0; k < S; ++k) {
        std::vector<double> left(d);
        int r = k;
        for (int c = 0; c < d; ++c) {
            left[c] = -cfg.a + (r % M) * side;
            r /= M;
        }
        T.coarse_left.push_back(left);
    }
    for (int k = 0; k < S; ++k) {
        if (d == 1) {
            T.sub_offset.push_back({k * T.h});
        } else {
            const int row = k / M;
            const int col = row % 2 == 0 ? k % M : M - 1 - k % M;
            T.sub_offset.push_back({col * T.h, row * T.h});
        }
    }
    std::vector<std::vector<double>> steps(S, std::vector<double>(d, 0.0));
    for (int k = 1; k < S; ++k)
        for (int c = 0; c < d; ++c) steps[k][c] = T.sub_offset[k][c] - T.sub_offset[k - 1][c];

    // derivative norm on the fine grid
    double fnorm = cfg.f_norm;
    if (fnorm <= 0.0) {
        for (int cell = 0; cell < S; ++cell)
            for (int k = 0; k < S; ++k) {
                std::vector<double> corner = add(T.coarse_left[cell], T.sub_offset[k]);
                for (const auto& l : mi.list) fnorm = std::max(fnorm, std::abs(cfg.derivative(corner, l)));
            }
        T.cfg.f_norm = fnorm;
    }
    T.size = taylor_size_check(T.cfg);

    // correction digits
    double fh_max = 0.0;
    T.digits.assign(S, std::vector<std::vector<int>>(D, std::vector<int>(S - 1, 0)));
    for (int cell = 0; cell < S; ++cell) {
        std::vector<double> fh(D);
        for (int i = 0; i < D; ++i) fh[i] = cfg.derivative(T.coarse_left[cell], mi.list[i]);
        for (double v : fh) fh_max = std::max(fh_max, std::abs(v));
        for (int k = 1; k < S; ++k) {
            std::vector<double> sh = taylor_shift(mi, q, fh, steps[k]);
            const std::vector<double> corner = add(T.coarse_left[cell], T.sub_offset[k]);
            for (int i = 0; i < D; ++i) {
                const double unit = T.c36 * std::pow(T.h, cfg.p - order(mi.list[i]));
                const double b = std::trunc((cfg.derivative(corner, mi.list[i]) - sh[i]) / unit);
                if (std::abs(b) > T.ce + 1)
                    throw DomainError("derivative oracle is not (p, C)-smooth: correction digit " + std::to_string(b));
                T.digits[cell][i][k - 1] = static_cast<int>(b);
                sh[i] += b * unit;
            }
            fh = sh;
            for (double v : fh) fh_max = std::max(fh_max, std::abs(v));
        }
        std::vector<double> codes(D);
        for (int i = 0; i < D; ++i) codes[i] = encode_digits(T.digits[cell][i], T.ce);
        T.codes.push_back(codes);
    }
    if (fh_max > R_ind) fail_scale("derivative values exceed the test-network range");

    // ---- deep network: state (x, phi2, phi3, phi4, phi5, phi6) ----
    const int X0 = 0, P2 = d, P3 = 2 * d, P4 = 2 * d + D, P5 = 2 * d + 2 * D, P6 = 3 * d + 2 * D;
    const int SZ = 3 * d + 3 * D;
    const Mat I_S = Mat::Identity(SZ, SZ);
    FeedForwardNet deep = embed_input(SZ, d);
    for (int j = 0; j < S; ++j) {
        std::vector<double> hi(d);
        for (int c = 0; c < d; ++c) hi[c] = T.coarse_left[j][c] + side;
        Mat out = Mat::Zero(SZ, 1);
        for (int c = 0; c < d; ++c) out(P2 + c, 0) = T.coarse_left[j][c];
        for (int i = 0; i < D; ++i) {
            out(P3 + i, 0) = cfg.derivative(T.coarse_left[j], mi.list[i]);
            out(P4 + i, 0) = T.codes[j][i];
        }
        deep = compose(build_stage(SZ, {indicator_term(SZ, d, X0, T.coarse_left[j], hi, R_ind)}, I_S, out,
                                   VecX::Zero(SZ)),
                       deep);
    }
    const std::vector<double> zero(d, 0.0), hvec(d, T.h);
    for (int j = 1; j <= S; ++j) {
        std::vector<FeedForwardNet> terms;
        Mat carry = I_S;
        VecX bias = VecX::Zero(SZ);
        const bool shift = j < S;
        const int nterms = d + D + (shift ? D : 0);
        Mat out = Mat::Zero(SZ, nterms);
        int t = 0;
        for (int c = 0; c < d; ++c, ++t) {
            terms.push_back(test_term(SZ, d, R_ind, X0, P2, zero, hvec, P2 + c, 0.0));
            out(P5 + c, t) = 1.0;
        }
        for (int i = 0; i < D; ++i, ++t) {
            terms.push_back(test_term(SZ, d, R_ind, X0, P2, zero, hvec, P3 + i, 0.0));
            out(P6 + i, t) = 1.0;
        }
        if (shift) {
            const double Rj = 2.0 * std::pow(T.base, S - 1 - j);
            for (int i = 0; i < D; ++i, ++t) {
                Mat sel = Mat::Zero(1, SZ);
                sel(0, P4 + i) = T.base;
                terms.push_back(compose(deepen(build_trunc_net(Rj, T.base - 1), 2), affine_net(sel, VecX::Zero(1))));
                const double unit = T.c36 * std::pow(T.h, cfg.p - order(mi.list[i]));
                // phi4 <- base phi4 - digit
                carry(P4 + i, P4 + i) = T.base;
                out(P4 + i, t) = -1.0;
                // phi3 <- shifted phi3 + (digit - ce - 2) unit
                out(P3 + i, t) = unit;
                bias(P3 + i) = -(T.ce + 2.0) * unit;
            }
            for (int i = 0; i < D; ++i) {
                for (int k = 0; k < D; ++k) carry(P3 + i, P3 + k) = 0.0;
                const auto& l = mi.list[i];
                for (int k = 0; k < D; ++k) {
                    const auto& s = mi.list[k];
                    if (order(l) + order(s) > q) continue;
                    std::vector<int> ls(d);
                    for (int c = 0; c < d; ++c) ls[c] = l[c] + s[c];
                    carry(P3 + i, P3 + mi.pos.at(ls)) += multi_pow(steps[j], s) / multi_factorial(s);
                }
            }
            for (int c = 0; c < d; ++c) bias(P2 + c) = steps[j][c];
        }
        deep = compose(build_stage(SZ, terms, carry, out, bias), deep);
    }
    // final Taylor polynomial in (x - phi5) with coefficients phi6 / l!
    {
        std::vector<double> r(D);
        double rsum = 0.0;
        for (int i = 0; i < D; ++i) {
            r[i] = 1.0 / multi_factorial(mi.list[i]);
            rsum += r[i];
        }
        T.poly_a = std::max(1.0, fh_max + 1.0);
        int R = static_cast<int>(std::ceil(multd_min_depth(q + 1, T.poly_a) - 1e-12));
        while (poly_error_bound(R, q, d, r, T.poly_a) > 1e-9) ++R;
        T.poly_R = R;
        Mat A = Mat::Zero(d + D, SZ);
        for (int c = 0; c < d; ++c) {
            A(c, X0 + c) = 1.0;
            A(c, P5 + c) = -1.0;
        }
        for (int i = 0; i < D; ++i) A(d + i, P6 + i) = 1.0;
        deep = compose(compose(build_poly_net(R, q, d, r, T.poly_a), affine_net(A, VecX::Zero(d + D))), deep);
        (void)rsum;
    }
    T.deep = deep;

    // ---- weight network: state (x, phi2, phi5) ----
    {
        const int W2 = d, W5 = 2 * d, WS = 3 * d;
        const Mat I_W = Mat::Identity(WS, WS);
        FeedForwardNet w = embed_input(WS, d);
        for (int j = 0; j < S; ++j) {
            std::vector<double> hi(d);
            for (int c = 0; c < d; ++c) hi[c] = T.coarse_left[j][c] + side;
            Mat out = Mat::Zero(WS, 1);
            for (int c = 0; c < d; ++c) out(W2 + c, 0) = T.coarse_left[j][c];
            w = compose(build_stage(WS, {indicator_term(WS, d, 0, T.coarse_left[j], hi, R_ind)}, I_W, out,
                                    VecX::Zero(WS)),
                        w);
        }
        for (int j = 1; j <= S; ++j) {
            std::vector<FeedForwardNet> terms;
            Mat out = Mat::Zero(WS, d);
            VecX bias = VecX::Zero(WS);
            for (int c = 0; c < d; ++c) {
                terms.push_back(test_term(WS, d, R_ind, 0, W2, zero, hvec, W2 + c, 0.0));
                out(W5 + c, c) = 1.0;
                if (j < S) bias(W2 + c) = steps[j][c];
            }
            w = compose(build_stage(WS, terms, I_W, out, bias), w);
        }
        // hat(u) = sigma(u) - 2 sigma(u - 1) + sigma(u - 2), u = (2/h)(x - phi5)
        FeedForwardNet hats;
        hats.input_dim = WS;
        Mat H = Mat::Zero(3 * d, WS);
        VecX hb = VecX::Zero(3 * d);
        Mat O = Mat::Zero(d, 3 * d);
        for (int c = 0; c < d; ++c) {
            for (int m = 0; m < 3; ++m) {
                H(3 * c + m, c) = 2.0 / T.h;
                H(3 * c + m, W5 + c) = -2.0 / T.h;
                hb(3 * c + m) = -m;
            }
            O(c, 3 * c) = 1.0;
            O(c, 3 * c + 1) = -2.0;
            O(c, 3 * c + 2) = 1.0;
        }
        hats.layers.push_back({H, hb});
        hats.layers.push_back({O, VecX::Zero(d)});
        w = compose(hats, w);
        if (d == 2) {
            int R = static_cast<int>(std::ceil(multd_min_depth(2, 1.0)));
            while (multd_error_bound(R, 2, 1.0) > 1e-10) ++R;
            w = compose(build_multd_net(R, 2, 1.0), w);
        }
        T.weight = w;
    }

    // ---- check network: state (x, phi2, c0, u) ----
    {
        const int C2 = d, CC = 2 * d, CU = 2 * d + 1, CS = 2 * d + 2;
        const Mat I_C = Mat::Identity(CS, CS);
        const double Rc = 1.0 / T.delta;
        FeedForwardNet c = embed_input(CS, d);
        for (int j = 0; j < S; ++j) {
            std::vector<double> hi(d);
            for (int k = 0; k < d; ++k) hi[k] = T.coarse_left[j][k] + side;
            std::vector<FeedForwardNet> terms{indicator_term(CS, d, 0, T.coarse_left[j], hi, R_ind)};
            Mat out = Mat::Zero(CS, 1 + (j == 0 ? S : 0));
            VecX bias = VecX::Zero(CS);
            for (int k = 0; k < d; ++k) out(C2 + k, 0) = T.coarse_left[j][k];
            if (j == 0) {
                // c0 = 1 - sum of indicators of the coarse cells shrunk by delta
                for (int m = 0; m < S; ++m) {
                    std::vector<double> lo(d), up(d);
                    for (int k = 0; k < d; ++k) {
                        lo[k] = T.coarse_left[m][k] + T.delta;
                        up[k] = T.coarse_left[m][k] + side - T.delta;
                    }
                    terms.push_back(indicator_term(CS, d, 0, lo, up, Rc));
                    out(CC, 1 + m) = -1.0;
                }
                bias(CC) = 1.0;
            }
            c = compose(build_stage(CS, terms, I_C, out, bias), c);
        }
        const std::vector<double> lo_off(d, T.delta), hi_off(d, T.h - T.delta);
        for (int j = 1; j <= S; ++j) {
            Mat out = Mat::Zero(CS, 1);
            out(CU, 0) = 1.0;
            VecX bias = VecX::Zero(CS);
            if (j < S)
                for (int k = 0; k < d; ++k) bias(C2 + k) = steps[j][k];
            c = compose(build_stage(CS, {test_term(CS, d, Rc, 0, C2, lo_off, hi_off, -1, 1.0)}, I_C, out, bias), c);
        }
        // check = c0 + sigma(sigma(1 - u) - c0)
        FeedForwardNet fin;
        fin.input_dim = CS;
        Mat L0 = Mat::Zero(2, CS);
        L0(0, CU) = -1.0;
        L0(1, CC) = 1.0;
        fin.layers.push_back({L0, (VecX(2) << 1.0, 0.0).finished()});
        Mat L1(2, 2);
        L1 << 1.0, -1.0, 0.0, 1.0;
        fin.layers.push_back({L1, VecX::Zero(2)});
        Mat L2(1, 2);
        L2 << 1.0, 1.0;
        fin.layers.push_back({L2, VecX::Zero(1)});
        T.check = compose(fin, c);
    }

    // ---- truncated deep net and the product ----
    const double e = std::exp(1.0);
    T.B_true = 1.0 + (fnorm * std::pow(e, S - 1) + T.base * (S - 1) * std::pow(e, S - 2)) * std::pow(e, 2 * cfg.a * d);
    {
        FeedForwardNet gate;
        gate.input_dim = 2;
        Mat G(2, 2);
        G << 1.0, -T.B_true, -1.0, -T.B_true;
        gate.layers.push_back({G, VecX::Zero(2)});
        gate.layers.push_back({(Mat(1, 2) << 1.0, -1.0).finished(), VecX::Zero(1)});
        T.truth = compose(gate, parallel_padded({T.deep, T.check}));
    }
    int Rm = static_cast<int>(std::ceil(std::log(std::pow(M, 2.0 * cfg.p)) / std::log(4.0)));
    while (mult_error_bound(Rm, T.B_true) > 1e-10) ++Rm;
    T.mult_R = Rm;
    T.assembled = compose(build_mult_net(Rm, T.B_true), parallel_padded({T.truth, T.weight}));
    T.certificate = net_weight_stats(T.assembled);
    T.certificate_c = std::log(T.certificate.sup_norm) / ((cfg.p + 1.0) * S);
    return T;
}

ShiftedTaylor shifted_partition_combine(const TaylorConfig& cfg) {
    cfg.validate();
    ShiftedTaylor out;
    const double h = 2.0 * cfg.a / (cfg.M * cfg.M);
    out.lo = -cfg.a + h / 2.0;
    out.hi = cfg.a;
    for (int mask = 0; mask < (1 << cfg.d); ++mask) {
        std::vector<double> v(cfg.d);
        for (int k = 0; k < cfg.d; ++k) v[k] = (mask >> k & 1) ? h / 2.0 : 0.0;
        TaylorConfig c = cfg;
        const DerivativeOracle f = cfg.derivative;
        c.derivative = [f, v](const std::vector<double>& y, const std::vector<int>& l) {
            std::vector<double> x(y.size());
            for (std::size_t k = 0; k < y.size(); ++k) x[k] = y[k] + v[k];
            return f(x, l);
        };
        out.nets.push_back(build_taylor_net(c));
        out.shifts.push_back(v);
    }
    return out;
}

double ShiftedTaylor::eval(const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t n = 0; n < nets.size(); ++n) {
        std::vector<double> y(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] - shifts[n][k];
        s += eval_ffnet(nets[n].assembled, y);
    }
    return s;
}

double ShiftedTaylor::weight_sum(const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t n = 0; n < nets.size(); ++n) {
        std::vector<double> y(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] - shifts[n][k];
        s += nets[n].weight_exact(y);
    }
    return s;
}

}  // namespace cnnsgd
