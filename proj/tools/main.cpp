// streamqoe: startup-buffering bounds and Monte-Carlo verification for
// interruption-free streaming.
//
// Subcommands: bounds, simulate, dstar, curve, rlnc-demo, martingale-check.
// Every output embeds the full parameter set and seed; re-running the same
// invocation reproduces the output byte for byte. Numbers are printed with
// std::to_chars (shortest round-trip form, never locale dependent).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "streamqoe/streamqoe.hpp"

namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (const auto& s : parts) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

struct Options {
    double eps = 0.01;
    double rate = 1.2;
    double file_size = 500.0;
    double initial_buffer = 0.0;
    double alpha0 = 1.0 / 16.0;
    double r = -1.0; // martingale-check tilt; negative = use the largest root
    unsigned block_size = 0;
    unsigned field_order = 256;
    std::uint64_t n = 100000;
    std::uint64_t n_paths = 1; // simulate's own sample count
    double confidence = 0.99;
    std::uint64_t seed = 12345;
    bool scan = false;
    bool raw_threshold = false; // interrupt at W instead of 0
    bool trace = false;
    std::string sweep;
    std::string grid;
    std::string out;
    std::string format = "csv";

    streamqoe::StreamConfig stream_config() const {
        streamqoe::StreamConfig cfg;
        cfg.rate = rate;
        cfg.file_size = file_size;
        cfg.initial_buffer = initial_buffer;
        cfg.block_size = block_size;
        cfg.threshold = raw_threshold ? static_cast<double>(block_size) : 0.0;
        cfg.seed = seed;
        return cfg;
    }

    streamqoe::ProbeSettings probe_settings() const {
        streamqoe::ProbeSettings ps;
        ps.n_per_probe = n;
        ps.confidence = confidence;
        ps.scan = scan;
        ps.alpha0 = alpha0;
        return ps;
    }
};

using Params = std::vector<std::pair<std::string, std::string>>;

std::string csv_header(const std::string& subcommand, const Params& params) {
    std::string line = "# streamqoe " + subcommand;
    for (const auto& [k, v] : params) line += " " + k + "=" + v;
    line += "\n";
    return line;
}

json params_json(const std::string& subcommand, const Params& params) {
    json j;
    j["subcommand"] = subcommand;
    json p = json::object();
    for (const auto& [k, v] : params) p[k] = v;
    j["params"] = p;
    return j;
}

void emit(const Options& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
        return;
    }
    std::filesystem::path path(opt.out);
    if (path.is_relative()) {
        if (const char* dir = std::getenv("STREAMQOE_OUT_DIR")) path = dir / path;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path.string());
    f << text;
}

std::vector<double> parse_grid(const std::string& grid) {
    std::vector<double> values;
    std::stringstream ss(grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        values.push_back(std::stod(item));
    }
    if (values.empty()) throw std::invalid_argument("--grid has no values");
    return values;
}

// ---------------------------------------------------------------- bounds --

int run_bounds(const Options& opt) {
    using namespace streamqoe;
    const BoundQuery query{opt.eps, opt.file_size, opt.rate};
    const BoundReport rep = bound_report(query, opt.alpha0);

    const Params params = {{"eps", num(opt.eps)},        {"R", num(opt.rate)},
                           {"T", num(opt.file_size)},    {"alpha0", num(opt.alpha0)},
                           {"format", opt.format}};
    if (opt.format == "json") {
        json j = params_json("bounds", params);
        json r;
        r["lower"] = rep.lower ? json(*rep.lower) : json(nullptr);
        r["upper"] = rep.upper ? json(*rep.upper) : json(nullptr);
        r["lower_regime"] = to_string(rep.lower_regime);
        r["upper_regime"] = to_string(rep.upper_regime);
        r["d_lower"] = rep.lower ? json(std::floor(*rep.lower)) : json(nullptr);
        r["d_upper"] = rep.upper ? json(std::ceil(*rep.upper)) : json(nullptr);
        r["notes"] = rep.notes;
        j["report"] = r;
        emit(opt, j.dump(2) + "\n");
        return 0;
    }

    std::string text = csv_header("bounds", params);
    text += "lower,upper,d_lower,d_upper,lower_regime,upper_regime,notes\n";
    text += (rep.lower ? num(*rep.lower) : "") + ",";
    text += (rep.upper ? num(*rep.upper) : "") + ",";
    text += (rep.lower ? num(std::floor(*rep.lower)) : "") + ",";
    text += (rep.upper ? num(std::ceil(*rep.upper)) : "") + ",";
    text += std::string(to_string(rep.lower_regime)) + ",";
    text += std::string(to_string(rep.upper_regime)) + ",";
    std::string notes = join(rep.notes, ';');
    for (char& c : notes)
        if (c == ',') c = ';';
    text += notes + "\n";
    emit(opt, text);
    return 0;
}

// -------------------------------------------------------------- simulate --

int run_simulate(const Options& opt) {
    using namespace streamqoe;
    StreamConfig cfg = opt.stream_config();
    cfg.validate();

    const Params params = {
        {"R", num(opt.rate)},           {"T", num(opt.file_size)},
        {"D", num(opt.initial_buffer)}, {"W", std::to_string(opt.block_size)},
        {"threshold", num(cfg.threshold)}, {"n", std::to_string(opt.n_paths)},
        {"seed", std::to_string(opt.seed)}, {"trace", opt.trace ? "1" : "0"},
        {"format", opt.format}};

    if (opt.trace) {
        if (opt.n_paths != 1)
            throw std::invalid_argument("--trace dumps a single path; use --n 1");
        const PathOutcome out = simulate_path(cfg, std::uint64_t{0}, true);
        if (opt.format == "json") {
            json j = params_json("simulate", params);
            j["interrupted"] = out.interrupted;
            j["stop_time"] = out.stop_time;
            j["arrivals"] = out.arrivals;
            json tr = json::array();
            for (const auto& pt : out.trace) tr.push_back({pt.time, pt.level});
            j["trace"] = tr;
            emit(opt, j.dump(2) + "\n");
            return 0;
        }
        std::string text = csv_header("simulate", params);
        text += "event_time,buffer_level\n";
        for (const auto& pt : out.trace)
            text += num(pt.time) + "," + num(pt.level) + "\n";
        emit(opt, text);
        return 0;
    }

    if (opt.format == "json") {
        json j = params_json("simulate", params);
        json rows = json::array();
        for (std::uint64_t i = 0; i < opt.n_paths; ++i) {
            const PathOutcome out = simulate_path(cfg, i);
            rows.push_back({{"path", i},
                            {"interrupted", out.interrupted},
                            {"stop_time", out.stop_time},
                            {"arrivals", out.arrivals}});
        }
        j["rows"] = rows;
        emit(opt, j.dump(2) + "\n");
        return 0;
    }
    std::string text = csv_header("simulate", params);
    text += "path,interrupted,stop_time,arrivals\n";
    for (std::uint64_t i = 0; i < opt.n_paths; ++i) {
        const PathOutcome out = simulate_path(cfg, i);
        text += std::to_string(i) + "," + (out.interrupted ? "1" : "0") + "," +
                num(out.stop_time) + "," + std::to_string(out.arrivals) + "\n";
    }
    emit(opt, text);
    return 0;
}

// --------------------------------------------------------- dstar / curve --

json row_json(const streamqoe::SweepRow& row) {
    json r;
    r["sweep_var"] = row.var;
    if (!row.error.empty()) {
        r["error"] = row.error;
        return r;
    }
    const auto& res = *row.result;
    r["d_star"] = res.d_star;
    r["p_hat"] = res.p_at_d.point;
    r["ci_half_width"] = res.p_at_d.half_width;
    r["n"] = res.p_at_d.n;
    r["flags"] = res.flags;
    r["bracket"] = {res.bracket_lo, res.bracket_hi};
    if (row.report.lower) {
        r["d_lower"] = std::floor(*row.report.lower);
        r["d_lower_raw"] = *row.report.lower;
    } else {
        r["d_lower"] = nullptr;
        r["d_lower_raw"] = nullptr;
    }
    if (row.report.upper) {
        r["d_upper"] = std::ceil(*row.report.upper);
        r["d_upper_raw"] = *row.report.upper;
    }
    if (res.p_at_d_minus_1)
        r["p_at_d_minus_1"] = {{"point", res.p_at_d_minus_1->point},
                               {"ci_half_width", res.p_at_d_minus_1->half_width},
                               {"n", res.p_at_d_minus_1->n}};
    return r;
}

std::string rows_csv(const std::vector<streamqoe::SweepRow>& rows) {
    std::string text =
        "sweep_var,d_star,d_lower,d_upper,p_hat,ci_half_width,n,flags,"
        "d_lower_raw,d_upper_raw\n";
    for (const auto& row : rows) {
        text += num(row.var) + ",";
        if (!row.error.empty()) {
            std::string msg = row.error;
            for (char& c : msg)
                if (c == ',') c = ';';
            text += ",,,,,,error:" + msg + ",,\n";
            continue;
        }
        const auto& res = *row.result;
        text += std::to_string(res.d_star) + ",";
        text += (row.report.lower ? num(std::floor(*row.report.lower)) : "") + ",";
        text += (row.report.upper ? num(std::ceil(*row.report.upper)) : "") + ",";
        text += num(res.p_at_d.point) + ",";
        text += num(res.p_at_d.half_width) + ",";
        text += std::to_string(res.p_at_d.n) + ",";
        text += join(res.flags, ';') + ",";
        text += (row.report.lower ? num(*row.report.lower) : "") + ",";
        text += (row.report.upper ? num(*row.report.upper) : "") + "\n";
    }
    return text;
}

Params mc_params(const Options& opt, bool with_eps) {
    Params params;
    if (with_eps) params.emplace_back("eps", num(opt.eps));
    params.insert(params.end(),
                  {{"R", num(opt.rate)},
                   {"T", num(opt.file_size)},
                   {"W", std::to_string(opt.block_size)},
                   {"threshold", opt.raw_threshold ? num(opt.block_size) : "0"},
                   {"n", std::to_string(opt.n)},
                   {"confidence", num(opt.confidence)},
                   {"seed", std::to_string(opt.seed)},
                   {"scan", opt.scan ? "1" : "0"},
                   {"alpha0", num(opt.alpha0)},
                   {"format", opt.format}});
    return params;
}

int run_dstar(const Options& opt) {
    using namespace streamqoe;
    SweepRow row;
    row.var = opt.eps;
    row.query = BoundQuery{opt.eps, opt.file_size, opt.rate};
    row.report = bound_report(row.query, opt.alpha0); // validates the query
    row.result = find_d_star(opt.eps, opt.stream_config(), opt.probe_settings());
    const Params params = mc_params(opt, true);
    if (opt.format == "json") {
        json j = params_json("dstar", params);
        j["result"] = row_json(row);
        emit(opt, j.dump(2) + "\n");
    } else {
        emit(opt, csv_header("dstar", params) + rows_csv({row}));
    }
    return 0;
}

int run_curve(const Options& opt) {
    using namespace streamqoe;
    if (opt.sweep != "epsilon" && opt.sweep != "rate")
        throw std::invalid_argument("--sweep must be 'epsilon' or 'rate'");
    const SweepKind kind =
        opt.sweep == "epsilon" ? SweepKind::Epsilon : SweepKind::Rate;
    const auto grid = parse_grid(opt.grid);
    const auto rows =
        sweep(kind, grid, opt.eps, opt.stream_config(), opt.probe_settings());

    Params params = mc_params(opt, kind == SweepKind::Rate);
    params.emplace_back("sweep", opt.sweep);
    params.emplace_back("grid", opt.grid);
    if (opt.format == "json") {
        json j = params_json("curve", params);
        json arr = json::array();
        for (const auto& row : rows) arr.push_back(row_json(row));
        j["rows"] = arr;
        emit(opt, j.dump(2) + "\n");
    } else {
        emit(opt, csv_header("curve", params) + rows_csv(rows));
    }
    return 0;
}

// ------------------------------------------------------------- rlnc-demo --

int run_rlnc_demo(const Options& opt) {
    using namespace streamqoe;
    const unsigned block = opt.block_size == 0 ? 32 : opt.block_size;
    const DeltaReport rep =
        estimate_delta(opt.field_order, block, opt.n, opt.seed, opt.confidence);
    const Params params = {{"q", std::to_string(opt.field_order)},
                           {"W", std::to_string(block)},
                           {"n", std::to_string(opt.n)},
                           {"confidence", num(opt.confidence)},
                           {"seed", std::to_string(opt.seed)},
                           {"format", opt.format}};
    if (opt.format == "csv") {
        std::string text = csv_header("rlnc-demo", params);
        text += "rank,ingested,redundant,frequency,theory\n";
        for (const auto& row : rep.per_rank) {
            const double freq = row.ingested == 0
                                    ? 0.0
                                    : static_cast<double>(row.redundant) /
                                          static_cast<double>(row.ingested);
            text += std::to_string(row.rank) + "," + std::to_string(row.ingested) +
                    "," + std::to_string(row.redundant) + "," + num(freq) + "," +
                    num(row.theory) + "\n";
        }
        text += "# delta_hat=" + num(rep.delta_hat) +
                " ci_half_width=" + num(rep.half_width) +
                " theory=" + num(rep.theory) +
                " packets=" + std::to_string(rep.packets) +
                " redundant=" + std::to_string(rep.redundant) + "\n";
        emit(opt, text);
        return 0;
    }
    json j = params_json("rlnc-demo", params);
    json r;
    r["q"] = rep.field_order;
    r["W"] = rep.block_size;
    r["trials"] = rep.trials;
    r["packets"] = rep.packets;
    r["redundant"] = rep.redundant;
    r["delta_hat"] = rep.delta_hat;
    r["ci_half_width"] = rep.half_width;
    r["confidence"] = rep.confidence;
    r["theory"] = rep.theory;
    json per_rank = json::array();
    for (const auto& row : rep.per_rank) {
        const double freq = row.ingested == 0
                                ? 0.0
                                : static_cast<double>(row.redundant) /
                                      static_cast<double>(row.ingested);
        per_rank.push_back({{"rank", row.rank},
                            {"ingested", row.ingested},
                            {"redundant", row.redundant},
                            {"frequency", freq},
                            {"theory", row.theory}});
    }
    r["per_rank"] = per_rank;
    j["report"] = r;
    emit(opt, j.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------ martingale-check --

int run_martingale_check(const Options& opt) {
    using namespace streamqoe;
    StreamConfig cfg = opt.stream_config();
    cfg.validate();
    const double r = opt.r >= 0.0 ? opt.r : largest_tilt_root(opt.rate).root;
    const std::vector<double> times = opt.grid.empty()
                                          ? std::vector<double>{5.0, 20.0, 50.0}
                                          : parse_grid(opt.grid);

    const Params params = {
        {"R", num(opt.rate)},           {"T", num(opt.file_size)},
        {"D", num(opt.initial_buffer)}, {"r", num(r)},
        {"grid", opt.grid.empty() ? "5,20,50" : opt.grid},
        {"n", std::to_string(opt.n)},   {"confidence", num(opt.confidence)},
        {"seed", std::to_string(opt.seed)}, {"format", opt.format}};

    struct Row {
        double t, mc, hw, closed;
        bool ok;
    };
    std::vector<Row> rows;
    for (double t : times) {
        const EstimateWithCI est =
            exponential_moment(cfg, r, t, opt.n, opt.confidence);
        const double closed =
            std::exp(-r * cfg.initial_buffer + t * tilt(r, cfg.rate));
        const double sigma = est.half_width / z_for_confidence(opt.confidence);
        rows.push_back({t, est.point, est.half_width, closed,
                        std::abs(est.point - closed) <= 3.0 * sigma + 1e-12});
    }

    if (opt.format == "json") {
        json j = params_json("martingale-check", params);
        json arr = json::array();
        for (const auto& row : rows)
            arr.push_back({{"t", row.t},
                           {"r", r},
                           {"mc", row.mc},
                           {"ci_half_width", row.hw},
                           {"closed_form", row.closed},
                           {"within_3_sigma", row.ok}});
        j["rows"] = arr;
        emit(opt, j.dump(2) + "\n");
        return 0;
    }
    std::string text = csv_header("martingale-check", params);
    text += "r,t,mc,ci_half_width,closed_form,within_3_sigma\n";
    for (const auto& row : rows)
        text += num(r) + "," + num(row.t) + "," + num(row.mc) + "," + num(row.hw) +
                "," + num(row.closed) + "," + (row.ok ? "1" : "0") + "\n";
    emit(opt, text);
    return 0;
}

void add_common_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--seed", opt.seed, "RNG seed (recorded in the output)");
    cmd->add_option("--out", opt.out,
                    "output file (default stdout; relative paths resolve under "
                    "$STREAMQOE_OUT_DIR)");
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"analytic bounds and Monte-Carlo verification of startup "
                 "buffering for interruption-free streaming"};
    app.require_subcommand(1);
    Options opt;

    CLI::App* bounds = app.add_subcommand(
        "bounds", "closed-form lower/upper bounds on the minimum buffer");
    bounds->add_option("--eps", opt.eps, "target interruption probability")
        ->required();
    bounds->add_option("--R", opt.rate, "useful-packet arrival rate")->required();
    bounds->add_option("--T", opt.file_size, "file size in packets")->required();
    bounds->add_option("--alpha0", opt.alpha0, "converse certification parameter");
    add_common_flags(bounds, opt);

    CLI::App* simulate =
        app.add_subcommand("simulate", "event-driven receiver-buffer sample paths");
    simulate->add_option("--R", opt.rate)->required();
    simulate->add_option("--T", opt.file_size)->required();
    simulate->add_option("--D", opt.initial_buffer)->required();
    simulate->add_option("--W", opt.block_size, "block size in packets");
    simulate->add_flag("--threshold", opt.raw_threshold,
                       "interrupt at buffer level W instead of 0");
    simulate->add_option("--n", opt.n_paths, "number of paths")->capture_default_str();
    simulate->add_flag("--trace", opt.trace, "dump (event_time, buffer_level) rows");
    add_common_flags(simulate, opt);

    CLI::App* dstar = app.add_subcommand(
        "dstar", "Monte-Carlo search for the minimum feasible integer buffer");
    dstar->add_option("--eps", opt.eps)->required();
    dstar->add_option("--R", opt.rate)->required();
    dstar->add_option("--T", opt.file_size)->required();
    dstar->add_option("--W", opt.block_size);
    dstar->add_flag("--threshold", opt.raw_threshold);
    dstar->add_option("--n", opt.n, "samples per probe")->capture_default_str();
    dstar->add_option("--confidence", opt.confidence)->capture_default_str();
    dstar->add_flag("--scan", opt.scan, "linear increase-until-feasible search");
    dstar->add_option("--alpha0", opt.alpha0);
    add_common_flags(dstar, opt);

    CLI::App* curve =
        app.add_subcommand("curve", "D* plus bounds over a parameter grid");
    curve->add_option("--sweep", opt.sweep, "epsilon | rate")->required();
    curve->add_option("--grid", opt.grid, "comma-separated grid values")->required();
    curve->add_option("--eps", opt.eps, "fixed epsilon (rate sweep)");
    curve->add_option("--R", opt.rate, "fixed rate (epsilon sweep)");
    curve->add_option("--T", opt.file_size)->required();
    curve->add_option("--W", opt.block_size);
    curve->add_flag("--threshold", opt.raw_threshold);
    curve->add_option("--n", opt.n)->capture_default_str();
    curve->add_option("--confidence", opt.confidence)->capture_default_str();
    curve->add_flag("--scan", opt.scan);
    curve->add_option("--alpha0", opt.alpha0);
    add_common_flags(curve, opt);

    CLI::App* rlnc = app.add_subcommand(
        "rlnc-demo", "random-linear-coding redundancy measurement");
    rlnc->add_option("--q", opt.field_order, "field order (2, 16, 256)")
        ->capture_default_str();
    rlnc->add_option("--W", opt.block_size, "block size")->default_str("32");
    rlnc->add_option("--n", opt.n, "decoder fills")->capture_default_str();
    rlnc->add_option("--confidence", opt.confidence)->capture_default_str();
    add_common_flags(rlnc, opt);

    CLI::App* mart = app.add_subcommand(
        "martingale-check",
        "Monte-Carlo exponential moment against the closed form");
    mart->add_option("--R", opt.rate)->required();
    mart->add_option("--T", opt.file_size)->required();
    mart->add_option("--D", opt.initial_buffer)->required();
    mart->add_option("--r", opt.r, "tilt parameter (default: largest tilt root)");
    mart->add_option("--grid", opt.grid, "comma-separated evaluation times");
    mart->add_option("--n", opt.n)->capture_default_str();
    mart->add_option("--confidence", opt.confidence)->capture_default_str();
    add_common_flags(mart, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        json err;
        err["error"] = {{"code", 2}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }

    // the rlnc report is a JSON interface unless csv is asked for explicitly
    if (rlnc->parsed() && rlnc->count("--format") == 0) opt.format = "json";

    try {
        if (bounds->parsed()) return run_bounds(opt);
        if (simulate->parsed()) return run_simulate(opt);
        if (dstar->parsed()) return run_dstar(opt);
        if (curve->parsed()) return run_curve(opt);
        if (rlnc->parsed()) return run_rlnc_demo(opt);
        if (mart->parsed()) return run_martingale_check(opt);
    } catch (const std::invalid_argument& e) {
        json err;
        err["error"] = {{"code", 2}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        json err;
        err["error"] = {{"code", 2}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        json err;
        err["error"] = {{"code", 1}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
