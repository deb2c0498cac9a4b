#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "json.hpp"

#include "cnnsgd/sgd.hpp"

namespace cnnsgd {

namespace {

constexpr int kCheckpointVersion = 1;

// 17 significant digits round-trip every double exactly
std::string encode(const std::vector<double>& v) {
    std::string out;
    char buf[40];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        if (i) out += ' ';
        out += buf;
    }
    return out;
}

std::vector<double> decode(const std::string& s) {
    std::vector<double> out;
    const char* p = s.c_str();
    char* end = nullptr;
    while (*p) {
        const double v = std::strtod(p, &end);
        if (end == p) break;
        out.push_back(v);
        p = end;
    }
    return out;
}

}  // namespace

std::string rng_state(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

void restore_rng(Rng& rng, const std::string& state) {
    std::istringstream is(state);
    is >> rng;
    if (!is) throw ConfigError("malformed RNG state");
}

std::string write_checkpoint(const Checkpoint& ck) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "cnnsgd-checkpoint";
    j["version"] = kCheckpointVersion;
    j["config"] = {{"L1", ck.config.L1},
                   {"channels", ck.config.channels},
                   {"filter_sizes", ck.config.filter_sizes},
                   {"L2", ck.config.L2},
                   {"beta", encode({ck.config.beta})}};
    ordered_json tr = {{"K", ck.train.K},
                       {"N", ck.train.N},
                       {"I", ck.train.I},
                       {"t", ck.train.t},
                       {"alpha", encode({ck.train.alpha})},
                       {"B", encode({ck.train.B})},
                       {"seed", ck.train.seed}};
    if (ck.train.lambda) tr["lambda"] = encode({*ck.train.lambda});
    if (ck.train.beta) tr["beta"] = encode({*ck.train.beta});
    j["train"] = tr;
    j["w_avg"] = encode(ck.w_avg);
    ordered_json th = ordered_json::array();
    for (const auto& p : ck.thetas) th.push_back(encode(p.flat));
    j["thetas"] = th;
    ordered_json th0 = ordered_json::array();
    for (const auto& p : ck.theta0) th0.push_back(encode(p.flat));
    j["theta0"] = th0;
    j["rng"] = ck.rng_state;
    return j.dump(1) + "\n";
}

Checkpoint read_checkpoint(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "cnnsgd-checkpoint") throw ConfigError("not a checkpoint document");
    if (j.at("version").get<int>() != kCheckpointVersion) throw ConfigError("unsupported checkpoint version");
    Checkpoint ck;
    const auto& c = j.at("config");
    ck.config.L1 = c.at("L1").get<int>();
    ck.config.channels = c.at("channels").get<std::vector<int>>();
    ck.config.filter_sizes = c.at("filter_sizes").get<std::vector<int>>();
    ck.config.L2 = c.at("L2").get<int>();
    ck.config.beta = decode(c.at("beta").get<std::string>()).at(0);
    ck.config.validate();
    const auto& t = j.at("train");
    ck.train.K = t.at("K").get<int>();
    ck.train.N = t.at("N").get<int>();
    ck.train.I = t.at("I").get<int>();
    ck.train.t = t.at("t").get<long long>();
    ck.train.alpha = decode(t.at("alpha").get<std::string>()).at(0);
    ck.train.B = decode(t.at("B").get<std::string>()).at(0);
    ck.train.seed = t.at("seed").get<std::uint64_t>();
    if (t.contains("lambda")) ck.train.lambda = decode(t.at("lambda").get<std::string>()).at(0);
    if (t.contains("beta")) ck.train.beta = decode(t.at("beta").get<std::string>()).at(0);
    ck.w_avg = decode(j.at("w_avg").get<std::string>());
    for (const auto& s : j.at("thetas")) ck.thetas.push_back(CnnParams{decode(s.get<std::string>())});
    for (const auto& s : j.at("theta0")) ck.theta0.push_back(CnnParams{decode(s.get<std::string>())});
    ck.rng_state = j.at("rng").get<std::string>();
    for (const auto& p : ck.thetas) p.check_shape(ck.config);
    if (ck.thetas.size() != ck.w_avg.size()) throw ConfigError("checkpoint ensemble size mismatch");
    return ck;
}

}  // namespace cnnsgd
