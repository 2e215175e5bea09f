#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "shortrace/covariance.hpp"
#include "shortrace/errors.hpp"
#include "shortrace/event.hpp"
#include "shortrace/explicit_formula.hpp"
#include "shortrace/gaussian_theory.hpp"
#include "shortrace/log_density.hpp"
#include "shortrace/moments_qli.hpp"
#include "shortrace/psi_sieve.hpp"
#include "shortrace/random_model.hpp"
#include "shortrace/zero_table.hpp"

namespace shortrace::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 20240229;
constexpr int kPresetVersion = 1;

// Thrown when --check finds a value outside its band.
struct CheckFailed {
    json report;
};

struct Common {
    std::string zeros;
    std::size_t zeros_limit = 0;
    std::string out;
    std::string csv;
    unsigned threads = 1;
    std::uint64_t seed = kDefaultSeed;
    bool check = false;
};

struct Race {
    std::string delta = "0.01";
    std::string shifts = "0";
};

void add_common(CLI::App* app, Common& c, bool with_seed = false) {
    app->add_option("--zeros", c.zeros, "zero table (default: bundled 10^5 zeros)");
    app->add_option("--zeros-limit", c.zeros_limit, "read at most this many ordinates");
    app->add_option("--out", c.out, "write JSON here instead of stdout");
    app->add_option("--threads", c.threads, "worker threads, 0 = all cores");
    if (with_seed) app->add_option("--seed", c.seed, "RNG seed");
}

void add_race(CLI::App* app, Race& r) {
    app->add_option("--delta", r.delta, "interval length ratio; accepts e^-10 style")->capture_default_str();
    app->add_option("--shifts", r.shifts, "comma separated shifts t_j")->capture_default_str();
}

double parse_real(const std::string& text, const char* what) {
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
    bool exponential = false;
    if (s.rfind("e^", 0) == 0) {
        exponential = true;
        s = s.substr(2);
    } else if (s.rfind("exp(", 0) == 0 && s.back() == ')') {
        exponential = true;
        s = s.substr(4, s.size() - 5);
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size()) throw ValidationError(std::string("cannot parse ") + what + " '" + text + "'");
    return exponential ? std::exp(v) : v;
}

RaceConfig make_config(const Race& r) { return RaceConfig(parse_real(r.delta, "--delta"), parse_csv_reals(r.shifts)); }

ZeroTable load_table(const Common& c) {
    const std::filesystem::path path = c.zeros.empty() ? default_data_dir() / "zeros_100k.txt" : std::filesystem::path(c.zeros);
    std::optional<std::size_t> limit;
    if (c.zeros_limit > 0) limit = c.zeros_limit;
    return load_zeros(path, limit);
}

json provenance(const std::string& command, const std::optional<std::string>& source_id,
                std::optional<std::uint64_t> seed, std::optional<double> height) {
    json p;
    p["tool"] = "shortrace";
    p["version"] = SHORTRACE_VERSION;
    p["command"] = command;
    p["source_id"] = source_id ? json(*source_id) : json(nullptr);
    p["seed"] = seed ? json(*seed) : json(nullptr);
    p["truncation_height"] = height ? json(*height) : json(nullptr);
    return p;
}

json to_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

json to_json(const RaceConfig& c) {
    return {{"delta", c.delta()}, {"shifts", std::vector<double>(c.shifts().begin(), c.shifts().end())}};
}

json to_json(const DensityEstimate& d) {
    return {{"p_hat", d.p_hat}, {"std_err", d.std_err}, {"n", d.n}, {"method", to_string(d.method)}};
}

json to_json(const GaussianPrediction& g) {
    return {{"value", g.value}, {"leading", g.leading}, {"correction", g.correction},
            {"remainder_order", g.remainder_order}};
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write " + path);
    f << std::setprecision(17);
    return f;
}

PsiTable psi_for(double x_hi, const RaceConfig& config, unsigned threads) {
    SieveOptions opt;
    opt.threads = threads;
    const double top = x_hi * (1.0 + (config.t_max() + 1.0) * config.delta()) + 2.0;
    if (top > static_cast<double>(opt.ceiling)) {
        std::ostringstream msg;
        msg << "x range needs psi up to " << top << ", beyond the sieve ceiling " << opt.ceiling;
        throw BudgetError(msg.str());
    }
    return PsiTable(static_cast<std::uint64_t>(top), opt);
}

std::string ordering_text(std::span<const std::size_t> order) {
    std::string s;
    for (std::size_t p = 0; p < order.size(); ++p) s += (p ? ">x" : "x") + std::to_string(order[p] + 1);
    return s;
}

std::vector<std::size_t> parse_order(const std::string& text, std::size_t r) {
    if (text.empty()) {
        std::vector<std::size_t> id(r);
        std::iota(id.begin(), id.end(), 0);
        return id;
    }
    std::vector<std::size_t> out;
    for (const double v : parse_csv_reals(text)) {
        if (v < 1 || v != std::floor(v)) throw ValidationError("--order takes 1-based coordinate indices");
        out.push_back(static_cast<std::size_t>(v) - 1);
    }
    return out;
}

struct Band {
    std::string name;
    double value;
    double lo;
    double hi;
    bool ok() const { return value >= lo && value <= hi; }
};

json bands_json(const std::vector<Band>& bands, bool& all_ok) {
    json a = json::array();
    all_ok = true;
    for (const auto& b : bands) {
        a.push_back({{"name", b.name}, {"value", b.value}, {"lo", b.lo}, {"hi", b.hi}, {"pass", b.ok()}});
        all_ok = all_ok && b.ok();
    }
    return a;
}

// ---------------------------------------------------------------- commands

json cmd_psi(const Common& c, const std::string& xs, std::uint64_t ceiling) {
    const auto values = parse_csv_reals(xs);
    SieveOptions opt;
    opt.ceiling = ceiling;
    opt.threads = c.threads;
    json rows = json::array();
    for (const double x : values) rows.push_back({{"x", x}, {"psi", psi_streaming(x, opt)}});
    json j;
    j["provenance"] = provenance("psi", std::nullopt, std::nullopt, std::nullopt);
    j["values"] = rows;
    return j;
}

json cmd_deviations(const Common& c, const Race& r, const std::string& xs) {
    const auto config = make_config(r);
    const auto values = parse_csv_reals(xs);
    if (values.empty()) throw ValidationError("--x needs at least one value");
    const auto psi = psi_for(*std::max_element(values.begin(), values.end()), config, c.threads);
    json rows = json::array();
    for (const double x : values) rows.push_back({{"x", x}, {"E", psi.deviation_vector(x, config)}});
    json j;
    j["provenance"] = provenance("deviations", std::nullopt, std::nullopt, std::nullopt);
    j["config"] = to_json(config);
    j["values"] = rows;
    return j;
}

json cmd_covariance(const Common& c, const Race& r, std::optional<double> height, bool with_tail) {
    const auto config = make_config(r);
    const auto zeros = load_table(c);
    const double h = height.value_or(zeros.max_height());
    const auto rep = covariance_numeric(config, zeros, h, c.threads);
    const auto corr = correlation_matrix(rep.numeric);
    json j;
    j["provenance"] = provenance("covariance", zeros.source_id(), std::nullopt, h);
    j["config"] = to_json(config);
    j["zero_count"] = rep.zero_count;
    j["numeric"] = to_json(rep.numeric);
    j["asymptotic"] = rep.asymptotic.size() ? to_json(rep.asymptotic) : json(nullptr);
    j["tail_estimate"] = rep.tail_estimate;
    if (with_tail) j["tail_integral"] = to_json(covariance_tail_integral(config, h));
    j["correlation"] = to_json(corr.entries);
    j["min_eigenvalue"] = corr.min_eigenvalue;
    j["positive_semidefinite"] = corr.positive_semidefinite;
    return j;
}

struct ModelFlags {
    std::optional<double> height;
    bool gaussian_tail = false;
};

void add_model(CLI::App* app, ModelFlags& m) {
    app->add_option("--height", m.height, "zeros with gamma <= height get random phases");
    app->add_flag("--gaussian-tail", m.gaussian_tail,
                  "add the remaining table zeros and the zero-density tail as a Gaussian vector");
}

RandomModel make_model(const RaceConfig& config, const ZeroTable& zeros, const ModelFlags& m, unsigned threads) {
    ModelOptions opt;
    opt.height = m.height;
    opt.gaussian_tail = m.gaussian_tail;
    opt.threads = threads;
    return RandomModel(config, zeros, opt);
}

json model_json(const RandomModel& model) {
    return {{"explicit_zeros", model.explicit_zero_count()}, {"height", model.height()},
            {"gaussian_tail", model.gaussian_tail()},       {"table_height", model.table_height()},
            {"covariance", to_json(model.covariance())}};
}

json cmd_simulate(const Common& c, const Race& r, const ModelFlags& m, std::uint64_t n, const std::string& event_text,
                  const std::string& dump) {
    const auto config = make_config(r);
    const auto zeros = load_table(c);
    const auto model = make_model(config, zeros, m, c.threads);
    const auto event = parse_event(event_text, config.r());
    json j;
    j["provenance"] = provenance("simulate", zeros.source_id(), c.seed, model.height());
    j["config"] = to_json(config);
    j["model"] = model_json(model);
    j["event"] = event.text;
    if (!dump.empty()) {
        const auto batch = sample(model, n, c.seed);
        auto f = open_csv(dump);
        for (std::size_t k = 0; k < config.r(); ++k) f << (k ? "," : "") << "X" << k + 1;
        f << '\n';
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto row = batch.row(i);
            for (std::size_t k = 0; k < row.size(); ++k) f << (k ? "," : "") << row[k];
            f << '\n';
        }
        j["estimate"] = to_json(estimate_event(batch, event.predicate));
        const auto mom = sample_moments(batch);
        j["sample_covariance"] = to_json(mom.covariance);
    } else {
        j["estimate"] = to_json(estimate_event(model, n, c.seed, event.predicate));
    }
    return j;
}

json cmd_predict(const Race& r, const std::string& target, const std::string& order_text) {
    const auto config = make_config(r);
    const std::size_t rr = config.r();
    json j;
    j["provenance"] = provenance("predict", std::nullopt, std::nullopt, std::nullopt);
    j["config"] = to_json(config);
    j["target"] = target;
    const double inf = std::numeric_limits<double>::infinity();
    if (target == "orthant" || target == "orthant-neg") {
        const Interval iv = target == "orthant" ? Interval{0.0, inf} : Interval{-inf, 0.0};
        const std::vector<Interval> box(rr, iv);
        j["prediction"] = to_json(negcorr_expansion(config, box));
    } else if (target == "order") {
        const auto order = parse_order(order_text, rr);
        j["ordering"] = ordering_text(order);
        j["prediction"] = to_json(ordering_prediction(config, order));
    } else if (target.rfind("top:", 0) == 0) {
        const double s = parse_real(target.substr(4), "top:s");
        if (s < 1 || s != std::floor(s)) throw ValidationError("top:s needs a positive integer s");
        auto order = parse_order(order_text, rr);
        order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(s)));
        if (order.size() != static_cast<std::size_t>(s)) throw ValidationError("top:s needs s <= r");
        j["prefix"] = ordering_text(order);
        j["prediction"] = to_json(top_s_prediction(config, order));
    } else if (target.rfind("tail:", 0) == 0) {
        j["prediction"] = to_json(large_deviation_prediction(rr, parse_real(target.substr(5), "tail:V")));
    } else {
        throw ValidationError("unknown --target '" + target + "' (orthant, orthant-neg, order, top:s, tail:V)");
    }
    return j;
}

json cmd_explicit(const Common& c, const Race& r, double x_lo, double x_hi, std::optional<double> height,
                  std::size_t n) {
    const auto config = make_config(r);
    const auto zeros = load_table(c);
    const double h = height.value_or(zeros.max_height());
    const auto psi = psi_for(x_hi, config, c.threads);
    const auto survey = residual_survey(x_lo, x_hi, config, zeros, psi, h, n, c.seed, c.threads);
    if (!c.csv.empty()) {
        auto f = open_csv(c.csv);
        f << "x,E_sieve,E_explicit,diff\n";
        for (const auto& s : survey.samples)
            f << s.x << ',' << s.sieve << ',' << s.explicit_value << ',' << s.sieve - s.explicit_value << '\n';
    }
    json j;
    j["provenance"] = provenance("explicit-check", zeros.source_id(), c.seed, h);
    j["config"] = to_json(config);
    j["x_range"] = {x_lo, x_hi};
    j["n"] = n;
    j["rms"] = survey.rms;
    j["corr"] = survey.corr;
    j["min_envelope"] = survey.min_envelope;
    if (c.check) {
        bool ok = false;
        j["bands"] = bands_json({{"corr", survey.corr, 0.95, 1.0},
                                 {"rms_over_envelope", survey.rms / survey.min_envelope, 0.0, 10.0}},
                                ok);
        if (!ok) throw CheckFailed{j};
    }
    return j;
}

json cmd_empirical(const Common& c, const Race& r, double x_lo, double x_hi, std::size_t n,
                   const std::string& event_text, const std::string& dump) {
    const auto config = make_config(r);
    const auto zeros = load_table(c);
    const auto psi = psi_for(x_hi, config, c.threads);
    const auto dist = collect(x_lo, x_hi, config, psi, zeros, n, c.seed, c.threads);
    if (!dump.empty()) {
        auto f = open_csv(dump);
        f << "x";
        for (std::size_t k = 0; k < config.r(); ++k) f << ",E" << k + 1;
        f << '\n';
        for (std::size_t i = 0; i < dist.n(); ++i) {
            f << dist.xs[i];
            for (const double v : dist.row(i)) f << ',' << v;
            f << '\n';
        }
    }
    json j;
    j["provenance"] = provenance("empirical", zeros.source_id(), c.seed, dist.variance_height);
    j["config"] = to_json(config);
    j["x_range"] = {x_lo, x_hi};
    j["variances"] = dist.variances;
    json cols = json::array();
    for (std::size_t k = 0; k < config.r(); ++k) {
        const auto m = column_moments(dist, k);
        json col{{"mean", m.mean}, {"variance", m.variance}};
        if (dist.n() >= 100) col["ks"] = ks_statistic(dist, k);
        cols.push_back(col);
    }
    j["coordinates"] = cols;
    if (config.r() >= 2) {
        Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(config.r(), config.r());
        for (std::size_t a = 0; a < config.r(); ++a)
            for (std::size_t b = a + 1; b < config.r(); ++b)
                corr(a, b) = corr(b, a) = empirical_correlation(dist, a, b);
        j["correlation"] = to_json(corr);
    }
    if (!event_text.empty()) {
        const auto event = parse_event(event_text, config.r());
        j["event"] = event.text;
        j["estimate"] = to_json(empirical_event_density(dist, event.predicate));
    }
    return j;
}

json cmd_moments(const Common& c, const std::string& ks_text, double delta, std::optional<double> height, double u,
                 std::size_t nodes) {
    std::vector<int> ks;
    for (const double k : parse_csv_reals(ks_text)) {
        if (k != std::floor(k)) throw ValidationError("--k takes integers");
        ks.push_back(static_cast<int>(k));
    }
    const auto zeros = load_table(c);
    const RaceConfig config(delta, {0.0});
    MomentOptions opt;
    opt.height = height.value_or(zeros.max_height());
    opt.horizon = u;
    opt.quad_points = nodes;
    opt.threads = c.threads;
    const auto res = weighted_moments(ks, config, zeros, SmoothWeight(), opt);
    json j;
    j["provenance"] = provenance("moments", zeros.source_id(), std::nullopt, opt.height);
    j["config"] = to_json(config);
    j["U"] = u;
    j["nodes"] = res.nodes;
    j["required_nodes"] = res.required_nodes;
    j["zero_count"] = res.zero_count;
    j["variance"] = res.variance;
    json rows = json::array();
    for (std::size_t q = 0; q < ks.size(); ++q)
        rows.push_back({{"k", ks[q]}, {"value", res.values[q]}, {"gaussian", res.gaussian[q]}});
    j["moments"] = rows;
    const auto gap = truncation_gap(opt.height, config, zeros);
    j["truncation_gap"] = {{"gap", gap.gap}, {"bound", gap.bound}};
    return j;
}

json cmd_qli(const Common& c, const std::string& signs_text, double height, std::optional<double> threshold,
             double ck) {
    std::vector<int> signs;
    for (const double s : parse_csv_reals(signs_text)) {
        if (s != 1.0 && s != -1.0) throw ValidationError("--signs takes +1/-1 entries");
        signs.push_back(static_cast<int>(s));
    }
    const auto zeros = load_table(c);
    const int k = static_cast<int>(signs.size());
    const double thr = threshold ? *threshold : qli_threshold(height, k, ck);
    const auto q = qli_resonance_count(signs, zeros, height, thr);
    json j;
    j["provenance"] = provenance("qli-count", zeros.source_id(), std::nullopt, height);
    j["k"] = q.k;
    j["signs"] = q.signs;
    j["threshold"] = q.threshold;
    j["c_k"] = threshold ? json(nullptr) : json(ck == 0.0 ? k + 1.0 : ck);
    j["zero_count"] = q.zero_count;
    j["count"] = q.count;
    j["diagonal"] = q.diagonal;
    j["ratio"] = q.ratio;
    return j;
}

// ---------------------------------------------------------------- presets

json preset_race(const Common& c, const std::string& name, std::optional<std::uint64_t> n_override) {
    const auto zeros = load_table(c);
    json j;
    std::vector<Band> bands;
    if (name == "corollary-3way") {
        const RaceConfig config(std::exp(-10.0), {-1.0, 0.0, 1.0});
        const std::uint64_t n = n_override.value_or(10'000'000);
        ModelOptions opt;
        opt.height = 400.0;
        opt.gaussian_tail = true;
        opt.threads = c.threads;
        const RandomModel model(config, zeros, opt);
        const auto est = estimate_ordering(model, n, c.seed);
        const auto pred = ordering_prediction(config);
        j["provenance"] = provenance("preset", zeros.source_id(), c.seed, model.height());
        j["config"] = to_json(config);
        j["model"] = model_json(model);
        j["ordering"] = "x1>x2>x3";
        j["estimate"] = to_json(est);
        j["prediction"] = to_json(pred);
        bands.push_back({"mc_vs_prediction", est.p_hat, pred.value - 5 * est.std_err, pred.value + 5 * est.std_err});
        bands.push_back({"prediction_vs_0.162701", pred.value, 0.162701 - 1e-6, 0.162701 + 1e-6});
    } else if (name == "orthant-pair") {
        const RaceConfig config(std::exp(-10.0), {0.0, 1.0});
        const std::uint64_t n = n_override.value_or(1'000'000);
        ModelOptions opt;
        opt.height = 1420.0;
        opt.gaussian_tail = true;
        opt.threads = c.threads;
        const RandomModel model(config, zeros, opt);
        const std::vector<Event> events{parse_event("x1>0&x2>0", 2).predicate, parse_event("x1<0&x2<0", 2).predicate};
        const auto est = estimate_events(model, n, c.seed, events);
        const double inf = std::numeric_limits<double>::infinity();
        const auto pred = negcorr_expansion(config, std::vector<Interval>(2, Interval{0.0, inf}));
        j["provenance"] = provenance("preset", zeros.source_id(), c.seed, model.height());
        j["config"] = to_json(config);
        j["model"] = model_json(model);
        j["positive"] = to_json(est[0]);
        j["negative"] = to_json(est[1]);
        j["prediction"] = to_json(pred);
        bands.push_back({"positive", est[0].p_hat, pred.value - 5 * est[0].std_err, pred.value + 5 * est[0].std_err});
        bands.push_back({"negative", est[1].p_hat, pred.value - 5 * est[1].std_err, pred.value + 5 * est[1].std_err});
    } else if (name == "extreme-bias") {
        // u = (1, ..., s, -L, -2L, ..., -(r-s)L) with L = log(1/delta); the
        // regime of the corresponding corollary is not asserted.
        const double delta = std::exp(-10.0);
        const std::size_t r = 6, s = 3;
        std::vector<double> u;
        for (std::size_t i = 1; i <= s; ++i) u.push_back(static_cast<double>(i));
        for (std::size_t i = 1; i <= r - s; ++i) u.push_back(-static_cast<double>(i) * 10.0);
        const RaceConfig config(delta, u);
        const std::uint64_t n = n_override.value_or(1'000'000);
        ModelOptions opt;
        opt.height = 400.0;
        opt.gaussian_tail = true;
        opt.threads = c.threads;
        const RandomModel model(config, zeros, opt);
        const auto est = estimate_top_s_ordering(model, s, n, c.seed);
        const std::vector<std::size_t> prefix{0, 1, 2};
        j["provenance"] = provenance("preset", zeros.source_id(), c.seed, model.height());
        j["config"] = to_json(config);
        j["model"] = model_json(model);
        j["s"] = s;
        j["estimate"] = to_json(est);
        j["prediction"] = to_json(top_s_prediction(config, prefix));
        j["unbiased"] = 1.0 / 120.0;
    } else {
        return nullptr;
    }
    j["preset"] = name;
    j["preset_version"] = kPresetVersion;
    if (!bands.empty()) {
        bool ok = false;
        j["bands"] = bands_json(bands, ok);
        if (c.check && !ok) throw CheckFailed{j};
    }
    return j;
}

json preset_other(const Common& c, const std::string& name) {
    json j;
    std::vector<Band> bands;
    if (name == "neighbor-intervals") {
        // [x - delta x, x] and [x, x + delta x]: shifts -1/2 and +1/2.
        const RaceConfig config(0.05, {-0.5, 0.5});
        const auto zeros = load_table(c);
        const auto psi = psi_for(1e8, config, c.threads);
        const auto dist = collect(1e6, 1e8, config, psi, zeros, 2000, c.seed, c.threads);
        const double corr = empirical_correlation(dist, 0, 1);
        j["provenance"] = provenance("preset", zeros.source_id(), c.seed, dist.variance_height);
        j["config"] = to_json(config);
        j["correlation"] = corr;
        j["predicted_correlation"] = -std::log(2.0) / std::log(20.0);
        for (std::size_t k = 0; k < 2; ++k) {
            const auto m = column_moments(dist, k);
            const double ks = ks_statistic(dist, k);
            bands.push_back({"variance_" + std::to_string(k + 1), m.variance, 0.5, 1.5});
            bands.push_back({"ks_" + std::to_string(k + 1), ks, 0.0, 0.15});
        }
        bands.push_back({"correlation_sign", corr, -1.0, 0.0});
    } else if (name == "moments") {
        Common cc = c;
        cc.zeros_limit = 10000;
        const auto zeros = load_table(cc);
        const RaceConfig config(0.01, {0.0});
        MomentOptions opt;
        opt.height = zeros.max_height();
        opt.horizon = 30.0;
        opt.threads = c.threads;
        const int ks[] = {1, 2, 3, 4};
        const auto res = weighted_moments(ks, config, zeros, SmoothWeight(), opt);
        j["provenance"] = provenance("preset", zeros.source_id(), std::nullopt, opt.height);
        j["config"] = to_json(config);
        j["U"] = 30.0;
        j["nodes"] = res.nodes;
        bands.push_back({"k1", res.values[0], -0.02, 0.02});
        bands.push_back({"k2", res.values[1], 0.95, 1.05});
        bands.push_back({"k3", res.values[2], -0.08, 0.08});
        bands.push_back({"k4", res.values[3], 2.7, 3.3});
    } else {
        throw ValidationError("unknown preset '" + name +
                              "' (corollary-3way, orthant-pair, extreme-bias, neighbor-intervals, moments)");
    }
    j["preset"] = name;
    j["preset_version"] = kPresetVersion;
    bool ok = false;
    j["bands"] = bands_json(bands, ok);
    if (c.check && !ok) throw CheckFailed{j};
    return j;
}

json cmd_compare(const Common& c, const Race& r, const ModelFlags& m, std::uint64_t n, double x_lo,
                 std::optional<double> x_hi, std::size_t n_emp) {
    const auto config = make_config(r);
    if (config.r() < 2 || config.r() > 4) throw ValidationError("compare supports 2 <= r <= 4");
    const auto zeros = load_table(c);
    const auto model = make_model(config, zeros, m, c.threads);
    std::vector<std::vector<std::size_t>> orders;
    std::vector<std::size_t> perm(config.r());
    std::iota(perm.begin(), perm.end(), 0);
    do orders.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<Event> events;
    for (const auto& o : orders) events.push_back(parse_event(ordering_text(o), config.r()).predicate);
    const auto mc = estimate_events(model, n, c.seed, events);
    std::optional<EmpiricalDistribution> dist;
    if (x_hi) {
        const auto psi = psi_for(*x_hi, config, c.threads);
        dist = collect(x_lo, *x_hi, config, psi, zeros, n_emp, c.seed, c.threads);
    }
    const bool small_delta = config.delta() <= 0.1;
    json rows = json::array();
    for (std::size_t i = 0; i < orders.size(); ++i) {
        json row{{"ordering", ordering_text(orders[i])}, {"monte_carlo", to_json(mc[i])}};
        row["gaussian"] = small_delta ? to_json(ordering_prediction(config, orders[i])) : json(nullptr);
        if (dist) row["sieve_empirical"] = to_json(empirical_event_density(*dist, events[i]));
        rows.push_back(row);
    }
    json j;
    j["provenance"] = provenance("compare", zeros.source_id(), c.seed, model.height());
    j["config"] = to_json(config);
    j["model"] = model_json(model);
    j["rows"] = rows;
    return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Short-interval prime races: sieve, zeros, random model and Gaussian predictions", "shortrace"};
    app.set_version_flag("--version", SHORTRACE_VERSION);
    app.require_subcommand(1);

    Common common;
    Race race;
    ModelFlags model;
    std::string xs, event = "order", emp_event, dump, target = "order", order, ks_text = "2", signs, preset_name;
    std::uint64_t ceiling = SieveOptions{}.ceiling, n = 100000;
    std::optional<std::uint64_t> n_opt;
    std::optional<double> height, x_hi_opt, threshold;
    double x_lo = 1e4, x_hi = 1e5, horizon = 30.0, delta_m = 0.01, ck = 0.0, t_height = 100.0;
    std::size_t n_small = 200, nodes = 0;
    bool with_tail = false;

    auto* psi = app.add_subcommand("psi", "Chebyshev psi(x) by segmented sieve");
    add_common(psi, common);
    psi->add_option("--x", xs, "comma separated x values")->required();
    psi->add_option("--ceiling", ceiling, "largest x the sieve may touch");

    auto* dev = app.add_subcommand("deviations", "normalized deviations E(x; delta, t_j)");
    add_common(dev, common);
    add_race(dev, race);
    dev->add_option("--x", xs, "comma separated x values")->required();

    auto* cov = app.add_subcommand("covariance", "covariance of the random model from zeros");
    add_common(cov, common);
    add_race(cov, race);
    cov->add_option("--height", height, "truncation height (default: whole table)");
    cov->add_flag("--with-tail", with_tail, "also report the zero-density tail integral above the height");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo over the random phase model");
    add_common(sim, common, true);
    add_race(sim, race);
    add_model(sim, model);
    sim->add_option("--n", n, "draws")->capture_default_str();
    sim->add_option("--event", event, "event expression, e.g. order, x1>x2>0, top:2")->capture_default_str();
    sim->add_option("--dump", dump, "write the draws as CSV");

    auto* pred = app.add_subcommand("predict", "Gaussian predictions with first-order corrections");
    add_race(pred, race);
    pred->add_option("--target", target, "orthant | orthant-neg | order | top:s | tail:V")->capture_default_str();
    pred->add_option("--order", order, "1-based coordinate order for order / top:s (default 1,2,...,r)");

    auto* expl = app.add_subcommand("explicit-check", "truncated explicit formula against the sieve");
    add_common(expl, common, true);
    add_race(expl, race);
    expl->add_option("--x-lo", x_lo)->capture_default_str();
    expl->add_option("--x-hi", x_hi)->capture_default_str();
    expl->add_option("--height", height, "truncation height Z (default: whole table)");
    expl->add_option("--n", n_small, "sample points")->capture_default_str();
    expl->add_option("--csv", common.csv, "write x,E_sieve,E_explicit,diff");
    expl->add_flag("--check", common.check, "exit 3 unless corr >= 0.95 and rms <= 10 x envelope");

    auto* emp = app.add_subcommand("empirical", "log-uniform samples of actual prime deviations");
    add_common(emp, common, true);
    add_race(emp, race);
    emp->add_option("--x-lo", x_lo)->capture_default_str();
    emp->add_option("--x-hi", x_hi)->capture_default_str();
    emp->add_option("--n", n_small, "sample points")->capture_default_str();
    emp->add_option("--event", emp_event, "event expression (default: none)");
    emp->add_option("--dump", dump, "write normalized rows as CSV");

    auto* mom = app.add_subcommand("moments", "smoothly weighted moments of the truncated deviation");
    add_common(mom, common);
    mom->add_option("--k", ks_text, "comma separated k values")->capture_default_str();
    mom->add_option("--delta", delta_m)->capture_default_str();
    mom->add_option("--height", height, "zeros up to T (default: whole table)");
    mom->add_option("--U", horizon)->capture_default_str();
    mom->add_option("--nodes", nodes, "quadrature nodes (default: twice the Nyquist minimum)");

    auto* qli = app.add_subcommand("qli-count", "near-resonances among signed sums of zeros");
    add_common(qli, common);
    qli->add_option("--signs", signs, "comma separated +1/-1, k = 2, 3 or 4 entries")->required();
    qli->add_option("--T", t_height, "zeros up to T")->capture_default_str();
    qli->add_option("--threshold", threshold, "explicit threshold (default T^-c_k)");
    qli->add_option("--ck", ck, "exponent c_k > k (default k + 1)");

    auto* pre = app.add_subcommand("preset", "named experiments with pinned parameters");
    add_common(pre, common, true);
    pre->add_option("name", preset_name,
                    "corollary-3way | orthant-pair | extreme-bias | neighbor-intervals | moments")
        ->required();
    pre->add_option("--n", n_opt, "override the pinned sample count");
    pre->add_flag("--check", common.check, "exit 3 when a band fails");

    auto* cmp = app.add_subcommand("compare", "Monte Carlo, Gaussian and sieve ordering densities side by side");
    add_common(cmp, common, true);
    add_race(cmp, race);
    add_model(cmp, model);
    cmp->add_option("--n", n, "model draws")->capture_default_str();
    cmp->add_option("--x-lo", x_lo)->capture_default_str();
    cmp->add_option("--x-hi", x_hi_opt, "add sieve-empirical estimates over [x-lo, x-hi]");
    cmp->add_option("--n-empirical", n_small, "sieve sample points")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    json result;
    int code = kExitOk;
    try {
        if (*psi) result = cmd_psi(common, xs, ceiling);
        else if (*dev) result = cmd_deviations(common, race, xs);
        else if (*cov) result = cmd_covariance(common, race, height, with_tail);
        else if (*sim) result = cmd_simulate(common, race, model, n, event, dump);
        else if (*pred) result = cmd_predict(race, target, order);
        else if (*expl) result = cmd_explicit(common, race, x_lo, x_hi, height, n_small);
        else if (*emp) result = cmd_empirical(common, race, x_lo, x_hi, n_small, emp_event, dump);
        else if (*mom) result = cmd_moments(common, ks_text, delta_m, height, horizon, nodes);
        else if (*qli) result = cmd_qli(common, signs, t_height, threshold, ck);
        else if (*pre) {
            result = preset_race(common, preset_name, n_opt);
            if (result.is_null()) result = preset_other(common, preset_name);
        } else if (*cmp) result = cmd_compare(common, race, model, n, x_lo, x_hi_opt, n_small);
    } catch (const CheckFailed& f) {
        result = f.report;
        code = kExitCheckFailed;
        err << "check failed: a value lies outside its band\n";
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }

    const std::string text = result.dump(2);
    if (common.out.empty()) {
        out << text << '\n';
    } else {
        std::ofstream f(common.out);
        if (!f) {
            err << "error: cannot write " << common.out << '\n';
            return kExitValidation;
        }
        f << text << '\n';
    }
    return code;
}

}  // namespace shortrace::cli
