#include "liqimpact/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

#include "liqimpact/compare.hpp"
#include "liqimpact/errors.hpp"
#include "liqimpact/estimation.hpp"
#include "liqimpact/impact.hpp"
#include "liqimpact/ingest.hpp"
#include "liqimpact/io.hpp"
#include "liqimpact/rng.hpp"
#include "liqimpact/sde.hpp"

namespace liqimpact::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> session_start, session_end;
    std::optional<int> bar_seconds;
    std::optional<double> tick_size;
    std::optional<std::string> model;
    bool pooled = false;
    std::optional<unsigned> jobs;
    std::optional<std::string> out_dir;

    std::vector<std::string> inputs;
    std::optional<std::string> kind;
    std::optional<double> x_min, x_max;
    std::optional<int> n_points;
    std::optional<std::string> day;
    std::vector<std::string> bars;
    std::vector<std::string> contracts;
    std::optional<std::string> baseline;
};

std::shared_ptr<spdlog::logger> make_logger() {
    auto log = spdlog::get("liqimpact");
    if (!log) log = spdlog::stderr_color_st("liqimpact");
    log->set_pattern("[%l] %v");
    const char* env = std::getenv("LIQIMPACT_LOG");
    log->set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
    return log;
}

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    if (!fs::exists(path)) throw ParseError("config file not found: " + path, 0);
    try {
        auto j = json::parse(io::read_file(path));
        if (!j.is_object()) throw ParseError("config must be a JSON object", 0);
        return j;
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

json block(const json& cfg, const char* name) {
    if (cfg.contains(name) && cfg[name].is_object()) return cfg[name];
    return json::object();
}

template <class T>
T pick(const std::optional<T>& flag, const json& j, const char* key, T def) {
    if (flag) return *flag;
    if (j.contains(key) && !j[key].is_null()) return j[key].get<T>();
    return def;
}

void write_json(const fs::path& path, const json& j) { io::write_file(path, j.dump(2) + "\n"); }

std::string stem_of(const std::string& path) {
    std::string name = fs::path(path).filename().string();
    for (const char* ext : {".gz", ".csv", ".json"})
        if (name.size() > std::strlen(ext) && name.ends_with(ext)) name.resize(name.size() - std::strlen(ext));
    return name;
}

unsigned resolve_jobs(unsigned j) { return j ? j : std::max(1u, std::thread::hardware_concurrency()); }

// Common effective configuration: flags override the config file.
json effective_config(const Flags& f, const std::string& command) {
    const json cfg = load_config(f.config);
    json eff;
    eff["schema_version"] = kSchemaVersion;
    eff["command"] = command;
    eff["config_file"] = f.config;
    eff["out_dir"] = pick(f.out_dir, cfg, "out_dir", std::string("."));
    eff["jobs"] = resolve_jobs(pick(f.jobs, cfg, "jobs", 0u));
    if (f.seed)
        eff["seed"] = *f.seed;
    else if (cfg.contains("seed") && !cfg["seed"].is_null())
        eff["seed"] = cfg["seed"].get<std::uint64_t>();
    else
        eff["seed"] = nullptr;

    const json s = block(cfg, "session");
    eff["session"] = {{"start", pick(f.session_start, s, "start", std::string("09:00"))},
                      {"end", pick(f.session_end, s, "end", std::string("15:00"))},
                      {"bar_seconds", pick(f.bar_seconds, s, "bar_seconds", 60)},
                      {"tick_size", pick(f.tick_size, s, "tick_size", 1e-4)}};

    const json fb = block(cfg, "fit");
    json fit = {{"model", pick(f.model, fb, "model", std::string("all"))},
                {"pooled", f.pooled || fb.value("pooled", false)},
                {"max_iterations", fb.value("max_iterations", 500)},
                {"rel_rss_tol", fb.value("rel_rss_tol", 1e-12)},
                {"grad_tol", fb.value("grad_tol", 1e-10)},
                {"margin_floor", fb.value("margin_floor", 1e-6)}};
    if (fb.contains("grid")) fit["grid"] = fb["grid"];
    eff["fit"] = fit;

    std::vector<std::string> inputs = f.inputs;
    if (inputs.empty() && cfg.contains("inputs")) inputs = cfg["inputs"].get<std::vector<std::string>>();
    eff["inputs"] = inputs;

    if (command == "simulate") {
        const json sb = block(cfg, "simulate");
        const json st = block(sb, "structural");
        json structural = {{"mu_s", st.value("mu_s", 0.0)},   {"sigma_s", st.value("sigma_s", 1e-3)},
                           {"rho", st.value("rho", 0.0)},     {"c", st.value("c", 0.5)},
                           {"m", st.value("m", 0.0)},         {"eta", st.value("eta", 160.0)},
                           {"delta", st.value("delta", 0.0)}, {"tau", st.value("tau", 0.0)},
                           {"r", st.value("r", 0.0)},         {"kappa0", st.value("kappa0", 0.0)}};
        json imp = sb.contains("impact") ? sb["impact"]
                                         : json{{"model", "sshape"}, {"ell", 1.3e-5}, {"p", -0.0034}, {"q", 8.15e-5}};
        const double dt = sb.value("dt", 1.0);
        const json pb = block(sb, "panel");
        const json fl = block(pb, "flow");
        json panel = {{"a", pb.value("a", 0.0)},
                      {"n_days", pb.value("n_days", 1)},
                      {"bars_per_day", pb.value("bars_per_day", 360)},
                      {"noise_sd", pb.value("noise_sd", 5e-4)},
                      {"flow",
                       {{"c", fl.value("c", structural["c"].get<double>())},
                        {"m", fl.value("m", structural["m"].get<double>())},
                        {"eta", fl.value("eta", structural["eta"].get<double>())},
                        {"dt", fl.value("dt", dt)}}}};
        if (f.model && *f.model != "all") imp["model"] = *f.model;
        eff["simulate"] = {{"kind", pick(f.kind, sb, "kind", std::string("path"))},
                           {"measure", sb.value("measure", std::string("physical"))},
                           {"dt", dt},
                           {"n_steps", sb.value("n_steps", 360)},
                           {"x0", sb.value("x0", 0.0)},
                           {"s0", sb.value("s0", 20000.0)},
                           {"structural", structural},
                           {"impact", imp},
                           {"panel", panel}};
    } else if (command == "curves") {
        const json cb = block(cfg, "curves");
        eff["curves"] = {{"x_min", pick(f.x_min, cb, "x_min", -400.0)},
                         {"x_max", pick(f.x_max, cb, "x_max", 400.0)},
                         {"n_points", pick(f.n_points, cb, "n_points", 801)},
                         {"model", pick(f.model, cb, "model", std::string("sshape"))},
                         {"day", pick(f.day, cb, "day", std::string())}};
    } else if (command == "compare") {
        const json cb = block(cfg, "compare");
        std::vector<std::string> bars = f.bars;
        if (bars.empty() && cb.contains("bars")) bars = cb["bars"].get<std::vector<std::string>>();
        std::vector<std::string> contracts = f.contracts;
        if (contracts.empty() && cb.contains("contracts")) contracts = cb["contracts"].get<std::vector<std::string>>();
        eff["compare"] = {{"baseline", pick(f.baseline, cb, "baseline", std::string("sqrt"))},
                          {"bars", bars},
                          {"contracts", contracts}};
    }
    return eff;
}

ingest::SessionSpec session_from(const json& eff) {
    const auto& s = eff["session"];
    ingest::SessionSpec spec;
    spec.start_us = ingest::parse_clock(s["start"].get<std::string>());
    spec.end_us = ingest::parse_clock(s["end"].get<std::string>());
    spec.bar_seconds = s["bar_seconds"].get<int>();
    spec.tick_size = s["tick_size"].get<double>();
    spec.validate();
    return spec;
}

std::uint64_t resolve_seed(json& eff) {
    if (!eff["seed"].is_null()) return eff["seed"].get<std::uint64_t>();
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    eff["seed"] = seed;
    eff["seed_drawn"] = true;
    return seed;
}

impact::ImpactParams impact_from_json(const json& j) {
    const auto model = impact::impact_model_from_string(j.value("model", std::string("sshape")));
    try {
        switch (model) {
            case impact::ImpactModel::sshape:
                return impact::SShapeParams{j.at("ell").get<double>(), j.at("p").get<double>(), j.at("q").get<double>()};
            case impact::ImpactModel::linear: return impact::LinearParams{j.at("alpha").get<double>()};
            case impact::ImpactModel::sqrt: return impact::SqrtParams{j.at("alpha").get<double>()};
        }
    } catch (const json::exception& e) {
        throw DomainError(std::string("impact block: ") + e.what());
    }
    throw DomainError("impact block: unknown model");
}

impact::StructuralParams structural_from_json(const json& j) {
    impact::StructuralParams sp;
    sp.mu_s = j["mu_s"];
    sp.sigma_s = j["sigma_s"];
    sp.rho = j["rho"];
    sp.c = j["c"];
    sp.m = j["m"];
    sp.eta = j["eta"];
    sp.delta = j["delta"];
    sp.tau = j["tau"];
    sp.r = j["r"];
    sp.kappa0 = j["kappa0"];
    return sp;
}

std::vector<impact::ImpactModel> models_from(const std::string& name) {
    if (name == "all") return {impact::ImpactModel::sshape, impact::ImpactModel::linear, impact::ImpactModel::sqrt};
    return {impact::impact_model_from_string(name)};
}

// ---------------------------------------------------------------------------

int cmd_ingest(json eff, spdlog::logger& log) {
    const auto session = session_from(eff);
    const auto inputs = eff["inputs"].get<std::vector<std::string>>();
    if (inputs.empty()) throw DomainError("ingest: no tick files given");
    const fs::path out_dir = eff["out_dir"].get<std::string>();

    struct Item {
        std::vector<ingest::DayBars> days;
        std::string error;
    };
    std::vector<Item> items(inputs.size());
    parallel_for(inputs.size(), eff["jobs"].get<unsigned>(), [&](std::size_t i) {
        try {
            items[i].days = ingest::build_bars(ingest::read_ticks(inputs[i]), session);
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    });
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (!items[i].error.empty()) throw ParseError(items[i].error, 0);

    json files = json::array();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto& days = items[i].days;
        const fs::path out = out_dir / (stem_of(inputs[i]) + ".bars.csv");
        io::write_file(out, ingest::bars_csv(days));
        json jd = json::array();
        std::size_t n_bars = 0;
        for (const auto& d : days) {
            for (const auto& w : d.warnings) log.warn("{}: {}", inputs[i], w);
            n_bars += d.bars.size();
            const std::size_t trades = d.buy_trades + d.sell_trades + d.unsigned_trades;
            jd.push_back({{"day", d.day},
                          {"bars", d.bars.size()},
                          {"buy_trades", d.buy_trades},
                          {"sell_trades", d.sell_trades},
                          {"unsigned_trades", d.unsigned_trades},
                          {"discarded_trades", d.discarded_trades},
                          {"unsigned_pct", trades ? 100.0 * static_cast<double>(d.unsigned_trades) / static_cast<double>(trades) : 0.0},
                          {"warnings", d.warnings}});
        }
        if (days.empty()) log.warn("{}: no ticks; empty bar file written", inputs[i]);
        json flow = nullptr;
        if (n_bars > 0) {
            const auto fs_ = ingest::flow_descriptives(days);
            flow = {{"n_bars", fs_.n_bars},
                    {"mean", fs_.mean},
                    {"sd", fs_.sd},
                    {"unsigned_pct", fs_.unsigned_pct},
                    {"daily_positive", fs_.daily_positive},
                    {"daily_negative", fs_.daily_negative}};
        }
        files.push_back({{"input", inputs[i]}, {"output", out.string()}, {"days", jd}, {"flow", flow}});
        log.info("{}: {} day(s), {} bar(s) -> {}", inputs[i], days.size(), n_bars, out.string());
    }
    write_json(out_dir / "ingest_summary.json", {{"schema_version", kSchemaVersion}, {"files", files}});
    write_json(out_dir / "ingest.config.json", eff);
    return 0;
}

int cmd_simulate(json eff, spdlog::logger& log) {
    const fs::path out_dir = eff["out_dir"].get<std::string>();
    const std::uint64_t seed = resolve_seed(eff);
    const auto& sb = eff["simulate"];
    const std::string kind = sb["kind"];
    const auto imp = impact_from_json(sb["impact"]);
    const auto sp = structural_from_json(sb["structural"]);
    json meta = {{"schema_version", kSchemaVersion},
                 {"kind", kind},
                 {"seed", seed},
                 {"rng", std::string(Rng::algorithm())},
                 {"config", sb}};

    if (kind == "path") {
        sim::SimConfig cfg;
        cfg.structural = sp;
        cfg.impact = imp;
        cfg.dt = sb["dt"];
        cfg.n_steps = sb["n_steps"].get<std::size_t>();
        cfg.x0 = sb["x0"];
        cfg.s0 = sb["s0"];
        cfg.seed = seed;
        cfg.measure = sim::measure_from_string(sb["measure"].get<std::string>());
        sim::validate(cfg);
        const auto path = sim::simulate_path(cfg);
        std::ostringstream ss;
        sim::write_path_csv(ss, path);
        io::write_file(out_dir / "path.csv", ss.str());
        meta["samples"] = path.size();
        log.info("simulated {} steps -> {}", cfg.n_steps, (out_dir / "path.csv").string());
    } else if (kind == "panel") {
        const auto& pb = sb["panel"];
        const auto& fl = pb["flow"];
        sim::OUParams flow{fl["c"], fl["m"], fl["eta"], fl["dt"]};
        impact::validate(imp);
        const auto panel = sim::synth_regression_panel(pb["a"], imp, flow, pb["n_days"], pb["bars_per_day"],
                                                       pb["noise_sd"], seed);
        std::ostringstream ss;
        sim::write_panel_csv(ss, panel);
        io::write_file(out_dir / "panel.csv", ss.str());
        meta["rows"] = panel.rows.size();
        meta["stationary_flow_sd"] = flow.stationary_sd();
        log.info("synthesized {} panel rows -> {}", panel.rows.size(), (out_dir / "panel.csv").string());
    } else {
        throw DomainError("simulate: --kind must be path or panel");
    }
    write_json(out_dir / "simulate.json", meta);
    write_json(out_dir / "simulate.config.json", eff);
    return 0;
}

// Bar files or synthetic panel files (day,bar,x,r) become per-day bars.
std::vector<ingest::DayBars> load_bar_like(const std::string& path) {
    const std::string text = io::read_file(path);
    const auto nl = text.find('\n');
    std::string header = text.substr(0, nl);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != "day,bar,x,r") {
        try {
            return ingest::parse_bars_csv(text);
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what(), 0);
        }
    }
    std::vector<ingest::DayBars> days;
    const auto lines = io::split_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = io::split_csv(lines[i]);
        if (f.size() != 4) throw ParseError(path + ": expected 4 fields", i + 1);
        ingest::MinuteBar b;
        b.day = std::string(f[0]);
        b.bar_index = static_cast<int>(io::parse_int(f[1], i + 1, "bar"));
        b.order_flow = io::parse_double(f[2], i + 1, "x");
        b.log_return = io::parse_double(f[3], i + 1, "r");
        b.last_price = std::nan("");
        b.open_bid_size = b.open_ask_size = std::nan("");
        if (days.empty() || days.back().day != b.day) {
            days.push_back({});
            days.back().day = b.day;
        }
        days.back().bars.push_back(std::move(b));
    }
    return days;
}

est::SShapeOptions sshape_options(const json& fit, unsigned jobs) {
    est::SShapeOptions o;
    o.max_iterations = fit["max_iterations"];
    o.rel_rss_tol = fit["rel_rss_tol"];
    o.grad_tol = fit["grad_tol"];
    o.margin_floor = fit["margin_floor"];
    o.jobs = jobs;
    if (fit.contains("grid"))
        for (const auto& g : fit["grid"]) o.grid.push_back({g.at("p").get<double>(), g.at("q").get<double>()});
    return o;
}

int cmd_fit(json eff, spdlog::logger& log) {
    const auto inputs = eff["inputs"].get<std::vector<std::string>>();
    if (inputs.empty()) throw DomainError("fit: no bar files given");
    const fs::path out_dir = eff["out_dir"].get<std::string>();
    const auto& fb = eff["fit"];
    const auto models = models_from(fb["model"].get<std::string>());
    const unsigned jobs = eff["jobs"];

    std::vector<ingest::DayBars> days;
    for (const auto& in : inputs) {
        auto d = load_bar_like(in);
        days.insert(days.end(), std::make_move_iterator(d.begin()), std::make_move_iterator(d.end()));
    }
    if (days.empty()) throw DomainError("fit: inputs contain no bars");

    struct Item {
        std::string day;
        impact::ImpactModel model;
        std::optional<est::FitResult> fit;
        std::string error;
    };
    std::vector<Item> items;
    for (const auto& d : days)
        for (auto m : models) items.push_back({d.day, m, std::nullopt, {}});
    const bool pooled = fb["pooled"].get<bool>();
    const std::size_t n_daily = items.size();
    if (pooled)
        for (auto m : models) items.push_back({"pooled", m, std::nullopt, {}});

    const auto per_day_opts = sshape_options(fb, 1);
    const auto pooled_opts = sshape_options(fb, jobs);
    const auto pooled_panel = pooled ? est::RegressionPanel::from_bars(days) : est::RegressionPanel{};
    auto run_item = [&](std::size_t i) {
        auto& it = items[i];
        try {
            if (i < n_daily) {
                const auto panel = est::RegressionPanel::from_bars(days[i / models.size()]);
                it.fit = est::fit_model(panel, it.model, per_day_opts);
            } else {
                it.fit = est::fit_model(pooled_panel, it.model, pooled_opts);
            }
        } catch (const Error& e) {
            it.error = e.what();
        }
    };
    parallel_for(n_daily, jobs, run_item);
    for (std::size_t i = n_daily; i < items.size(); ++i) run_item(i);

    std::ostringstream csv;
    csv << est::fit_csv_header() << '\n';
    json fits = json::array();
    json failures = json::array();
    std::size_t ok = 0;
    for (const auto& it : items) {
        if (it.fit) {
            ++ok;
            csv << est::fit_csv_row(it.day, *it.fit) << '\n';
            json j = est::to_json(*it.fit);
            j["day"] = it.day;
            fits.push_back(j);
            if (!it.fit->converged) log.warn("fit {} {}: not converged ({})", it.day, impact::to_string(it.model), it.fit->message);
        } else {
            failures.push_back({{"day", it.day}, {"model", std::string(impact::to_string(it.model))}, {"error", it.error}});
            log.warn("fit {} {} failed: {}", it.day, impact::to_string(it.model), it.error);
        }
    }
    json ou = nullptr;
    try {
        std::vector<std::vector<double>> segs;
        for (const auto& d : days) {
            std::vector<double> s;
            for (const auto& b : d.bars) s.push_back(b.order_flow);
            segs.push_back(std::move(s));
        }
        ou = est::to_json(est::estimate_ou(segs));
    } catch (const EstimationError& e) {
        log.info("order-flow OU estimate unavailable: {}", e.what());
    }
    io::write_file(out_dir / "fits.csv", csv.str());
    write_json(out_dir / "fits.json", {{"schema_version", kSchemaVersion},
                                       {"inputs", inputs},
                                       {"fits", fits},
                                       {"failures", failures},
                                       {"order_flow_ou", ou},
                                       {"summary", {{"items", items.size()}, {"succeeded", ok}, {"failed", items.size() - ok}}}});
    write_json(out_dir / "fit.config.json", eff);
    log.info("{} of {} fits succeeded -> {}", ok, items.size(), (out_dir / "fits.csv").string());
    return ok == 0 ? 1 : 0;
}

int cmd_curves(json eff, spdlog::logger& log) {
    const auto inputs = eff["inputs"].get<std::vector<std::string>>();
    if (inputs.size() != 1) throw DomainError("curves: expected exactly one fit JSON");
    const fs::path out_dir = eff["out_dir"].get<std::string>();
    const auto& cb = eff["curves"];
    json doc;
    try {
        doc = json::parse(io::read_file(inputs[0]));
    } catch (const json::parse_error& e) {
        throw ParseError(inputs[0] + ": " + e.what(), 0);
    }
    std::string model = cb["model"];
    if (model == "all") model = "sshape";
    const std::string want_day = cb["day"];
    json chosen;
    if (doc.contains("fits")) {
        const json* pick_fit = nullptr;
        for (const auto& f : doc["fits"]) {
            if (f.value("model", std::string()) != model) continue;
            const std::string d = f.value("day", std::string());
            if (!want_day.empty()) {
                if (d == want_day) pick_fit = &f;
            } else if (d == "pooled" || !pick_fit) {
                pick_fit = &f;
            }
        }
        if (!pick_fit) throw DomainError("curves: no " + model + " fit" + (want_day.empty() ? "" : " for day " + want_day));
        chosen = *pick_fit;
    } else {
        chosen = doc;
    }
    const auto fit = est::fit_from_json(chosen);
    const auto params = fit.impact_params();
    impact::validate(params);

    const int n = cb["n_points"];
    const double x_min = cb["x_min"], x_max = cb["x_max"];
    if (n < 2) throw DomainError("curves: n_points must be >= 2");
    if (!(x_max > x_min)) throw DomainError("curves: x_max must exceed x_min");
    std::optional<impact::SShapeCurve> curve;
    if (auto* s = std::get_if<impact::SShapeParams>(&params)) curve.emplace(*s);
    std::ostringstream csv;
    csv << "x,f,f_bps\n";
    const double mid = 0.5 * (x_max + x_min), half = 0.5 * (x_max - x_min);
    for (int i = 0; i < n; ++i) {
        // Symmetric in i so symmetric ranges give exactly mirrored x.
        const double t = static_cast<double>(2 * i - (n - 1)) / static_cast<double>(n - 1);
        const double x = mid + half * t;
        const double f = curve ? curve->f(x) : impact::impact_f(x, params);
        csv << io::format_double(x) << ',' << io::format_double(f) << ',' << io::format_double(f * 1e4) << '\n';
    }
    io::write_file(out_dir / "curve.csv", csv.str());
    eff["selected_fit"] = chosen;
    write_json(out_dir / "curves.config.json", eff);
    log.info("{} points of the {} curve -> {}", n, model, (out_dir / "curve.csv").string());
    return 0;
}

int cmd_compare(json eff, spdlog::logger& log) {
    const auto inputs = eff["inputs"].get<std::vector<std::string>>();
    if (inputs.empty()) throw DomainError("compare: no fit CSVs given");
    const fs::path out_dir = eff["out_dir"].get<std::string>();
    const auto& cb = eff["compare"];
    const auto bars_files = cb["bars"].get<std::vector<std::string>>();
    auto contracts = cb["contracts"].get<std::vector<std::string>>();
    if (!bars_files.empty() && bars_files.size() != inputs.size())
        throw DomainError("compare: give one --bars file per fit CSV");
    if (contracts.empty())
        for (const auto& in : inputs) contracts.push_back(stem_of(in));
    if (contracts.size() != inputs.size()) throw DomainError("compare: give one --contract label per fit CSV");
    const auto baseline = impact::impact_model_from_string(cb["baseline"].get<std::string>());

    std::vector<cmp::TTestRow> ttests;
    std::vector<cmp::DescriptiveRow> table6, table7;
    json report = json::array();
    for (std::size_t c = 0; c < inputs.size(); ++c) {
        const auto rows = est::parse_fit_csv(io::read_file(inputs[c]));
        std::vector<impact::ImpactModel> present;
        for (auto m : {impact::ImpactModel::sshape, impact::ImpactModel::linear, impact::ImpactModel::sqrt})
            if (std::any_of(rows.begin(), rows.end(), [m](const est::FitRow& r) { return r.model == m; }))
                present.push_back(m);
        if (present.empty()) throw DomainError("compare: " + inputs[c] + " has no fit rows");
        json excluded = json::object();
        std::map<impact::ImpactModel, cmp::DailyMetricSeries> series;
        for (auto m : present) {
            std::size_t ex = 0;
            series.emplace(m, cmp::series_from_fits(contracts[c], m, rows, &ex));
            excluded[std::string(impact::to_string(m))] = ex;
        }
        // Each model against the baseline; a lone model is compared with itself.
        const auto base = series.count(baseline) ? baseline : present.front();
        json jt = json::array();
        for (auto m : present) {
            if (m == base && present.size() > 1) continue;
            for (auto metric : {cmp::Metric::adj_r2, cmp::Metric::rss, cmp::Metric::bic}) {
                const auto t = cmp::paired_t_test(series.at(m), series.at(base), metric);
                ttests.push_back({contracts[c], series.at(m).model, series.at(base).model, metric, t});
                json tj = cmp::to_json(t);
                tj["model_a"] = series.at(m).model;
                tj["model_b"] = series.at(base).model;
                tj["metric"] = std::string(cmp::to_string(metric));
                jt.push_back(tj);
            }
        }

        json desc = json::object();
        auto add_desc = [&](const std::string& name, const std::vector<double>& v) {
            if (v.empty()) return;
            const auto d = cmp::descriptives(v);
            table6.push_back({contracts[c], name, d});
            desc[name] = cmp::to_json(d);
        };
        std::vector<double> ell, ell_bps, p, q, infl;
        for (const auto& r : rows)
            if (r.model == impact::ImpactModel::sshape && r.converged && r.day != "pooled") {
                ell.push_back(r.ell);
                ell_bps.push_back(r.ell * 1e4);
                p.push_back(r.p);
                q.push_back(r.q);
                infl.push_back(r.inflection);
            }
        add_desc("ell", ell);
        add_desc("ell_bps", ell_bps);
        add_desc("p", p);
        add_desc("q", q);
        add_desc("inflection", infl);
        for (auto m : present) add_desc("adj_r2_" + series.at(m).model, series.at(m).adj_r2);

        std::vector<ingest::DayBars> bars;
        if (!bars_files.empty()) bars = load_bar_like(bars_files[c]);
        const auto depth = cmp::depth_report(contracts[c], cmp::depth_fits_from_rows(rows), bars);
        if (depth.inflection_stats) table7.push_back({contracts[c], "inflection", *depth.inflection_stats});
        if (depth.open_bid_size) table7.push_back({contracts[c], "open_bid_size", *depth.open_bid_size});
        if (depth.open_ask_size) table7.push_back({contracts[c], "open_ask_size", *depth.open_ask_size});

        report.push_back({{"contract", contracts[c]},
                          {"input", inputs[c]},
                          {"excluded_nonconverged", excluded},
                          {"ttests", jt},
                          {"descriptives", desc},
                          {"depth", cmp::to_json(depth)}});
        log.info("{}: {} model(s), {} t-test row(s)", contracts[c], present.size(), jt.size());
    }
    io::write_file(out_dir / "table5_ttests.csv", cmp::ttest_table_csv(ttests));
    io::write_file(out_dir / "table6_descriptives.csv", cmp::descriptive_table_csv(table6));
    io::write_file(out_dir / "table7_depth.csv", cmp::descriptive_table_csv(table7));
    write_json(out_dir / "compare.json", {{"schema_version", kSchemaVersion},
                                          {"percentile_method", "linear interpolation between closest ranks (type 7)"},
                                          {"baseline", cb["baseline"]},
                                          {"contracts", report}});
    write_json(out_dir / "compare.config.json", eff);
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    auto log = make_logger();
    CLI::App app{"Order-flow price impact toolkit: ingest ticks, simulate, fit and compare impact models"};
    app.set_version_flag("--version", "liqimpact 0.1.0");
    app.require_subcommand(1);
    Flags f;

    auto add_common = [&f](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON config file; flags override it");
        sub->add_option("--seed", f.seed, "Random seed (drawn and recorded when omitted)");
        sub->add_option("--session-start", f.session_start, "Session start HH:MM[:SS]");
        sub->add_option("--session-end", f.session_end, "Session end HH:MM[:SS], exclusive");
        sub->add_option("--bar-seconds", f.bar_seconds, "Bar width in seconds (default 60)");
        sub->add_option("--tick-size", f.tick_size, "Price tick used to normalize prices before signing");
        sub->add_option("--model", f.model, "Impact model: sshape|linear|sqrt|all")
            ->check(CLI::IsMember({"sshape", "linear", "sqrt", "all"}));
        sub->add_flag("--pooled", f.pooled, "Also fit all days pooled together");
        sub->add_option("--jobs", f.jobs, "Worker threads (default: machine parallelism)");
        sub->add_option("--out-dir", f.out_dir, "Output directory");
    };

    auto* ingest_cmd = app.add_subcommand("ingest", "Tick CSV(s) to per-day 1-minute bar CSVs");
    add_common(ingest_cmd);
    ingest_cmd->add_option("ticks", f.inputs, "Tick files (.csv or .csv.gz)");

    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a price path or a synthetic regression panel");
    add_common(sim_cmd);
    sim_cmd->add_option("--kind", f.kind, "path or panel")->check(CLI::IsMember({"path", "panel"}));

    auto* fit_cmd = app.add_subcommand("fit", "Fit impact models per day (and pooled)");
    add_common(fit_cmd);
    fit_cmd->add_option("bars", f.inputs, "Bar CSVs or synthetic panel CSVs");

    auto* curves_cmd = app.add_subcommand("curves", "Sample a fitted impact curve");
    add_common(curves_cmd);
    curves_cmd->add_option("fit", f.inputs, "Fit JSON (fits.json or a single fit)");
    curves_cmd->add_option("--x-min", f.x_min, "Lowest order flow (default -400)");
    curves_cmd->add_option("--x-max", f.x_max, "Highest order flow (default 400)");
    curves_cmd->add_option("--n-points", f.n_points, "Number of samples (default 801)");
    curves_cmd->add_option("--day", f.day, "Day label to pick from fits.json (default pooled, else first)");

    auto* cmp_cmd = app.add_subcommand("compare", "Paired t-tests, descriptives and depth reports");
    add_common(cmp_cmd);
    cmp_cmd->add_option("fits", f.inputs, "fits.csv per contract");
    cmp_cmd->add_option("--bars", f.bars, "Bar CSV per contract, same order as the fit CSVs");
    cmp_cmd->add_option("--contract", f.contracts, "Contract label per fit CSV (default: file stem)");
    cmp_cmd->add_option("--baseline", f.baseline, "Baseline model for t-tests (default sqrt)")
        ->check(CLI::IsMember({"sshape", "linear", "sqrt"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::map<CLI::App*, std::pair<std::string, std::function<int(json, spdlog::logger&)>>> commands = {
        {ingest_cmd, {"ingest", cmd_ingest}},
        {sim_cmd, {"simulate", cmd_simulate}},
        {fit_cmd, {"fit", cmd_fit}},
        {curves_cmd, {"curves", cmd_curves}},
        {cmp_cmd, {"compare", cmd_compare}}};
    for (const auto& [sub, entry] : commands) {
        if (!sub->parsed()) continue;
        try {
            return entry.second(effective_config(f, entry.first), *log);
        } catch (const ParseError& e) {
            log->error("{}", e.what());
            return 2;
        } catch (const DomainError& e) {
            log->error("{}", e.what());
            return 2;
        } catch (const json::exception& e) {
            log->error("configuration error: {}", e.what());
            return 2;
        } catch (const std::exception& e) {
            log->error("{}", e.what());
            return 1;
        }
    }
    return 2;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace liqimpact::cli
