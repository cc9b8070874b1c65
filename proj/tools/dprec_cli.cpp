// Command-line front end: bound | signal | optimize | map | mc.
//
// Physical values carry explicit unit suffixes ("10um", "43 ms", "40mT/m",
// "1e-5cm2/s"). Keys come from an optional flat config file
// (`key = value`, `#` comments) and are overridden by --key flags.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dprec/dprec.hpp"

namespace {

using namespace dprec;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { length, time, gradient, diffusivity, number, integer, text, list };

enum Cmd : unsigned {
    kSignal = 1u << 0,
    kOptimize = 1u << 1,
    kMap = 1u << 2,
    kMc = 1u << 3,
};

constexpr unsigned kTissueCmds = kSignal | kOptimize | kMap | kMc;
constexpr unsigned kEngineCmds = kSignal | kOptimize | kMap;

struct KeySpec {
    const char* name;
    Kind kind;
    const char* fallback;  // "" = unset
    const char* help;
    unsigned commands;
    bool in_header = true;  // paths and thread count stay out of output headers
};

// clang-format off
const std::vector<KeySpec> kKeys = {
    {"geometry", Kind::text, "cylinder", "lorentzian|planar|cylinder|sphere", kTissueCmds},
    {"size", Kind::length, "10um", "slab width or diameter [length: um, mm, m]", kTissueCmds},
    {"ell_c", Kind::length, "", "restriction length for geometry=lorentzian [length]", kTissueCmds},
    {"D0", Kind::diffusivity, "1e-5cm2/s", "free diffusivity [cm2/s, um2/ms, m2/s]", kTissueCmds},
    {"T2", Kind::time, "inf", "transverse relaxation time, or inf [time: ms, s, us]", kTissueCmds},
    {"gamma", Kind::number, "2.6752218744e8", "gyromagnetic ratio [rad/s/T]", kTissueCmds},
    {"sequence", Kind::text, "hahn", "hahn|pgse", kTissueCmds},
    {"delta_fraction", Kind::number, "0.25", "PGSE pulse length as a fraction of t, in (0, 0.5]", kTissueCmds},
    {"method", Kind::text, "auto", "attenuation engine auto|hahn|time|freq", kEngineCmds},
    {"spectrum", Kind::text, "lorentzian", "lorentzian|expansion (geometry eigen-modes)", kEngineCmds},
    {"truncation", Kind::integer, "50", "retained modes of the geometry expansion", kEngineCmds | kMc},
    {"G", Kind::gradient, "", "gradient amplitude [T/m, mT/m, G/cm]", kSignal | kOptimize | kMc},
    {"ratios", Kind::list, "", "comma list of ell_c^2/ell_G^2 values, one curve each", kSignal},
    {"t_min", Kind::time, "1ms", "first diffusion time [time]", kSignal | kMap},
    {"t_max", Kind::time, "1000ms", "last diffusion time [time]", kSignal | kMap},
    {"t_points", Kind::integer, "200", "log-spaced diffusion times", kSignal | kMap},
    {"G_min", Kind::gradient, "1mT/m", "lowest gradient [gradient]", kOptimize | kMap},
    {"G_max", Kind::gradient, "1000mT/m", "highest gradient [gradient]", kOptimize | kMap},
    {"G_points", Kind::integer, "100", "log-spaced gradients", kMap},
    {"d_min", Kind::length, "1um", "smallest size for map_kind=dG [length]", kMap},
    {"d_max", Kind::length, "20um", "largest size for map_kind=dG [length]", kMap},
    {"d_points", Kind::integer, "100", "log-spaced sizes for map_kind=dG", kMap},
    {"map_kind", Kind::text, "tG", "tG (eps0/eps over t x G) | dG ((eps/eps0)^2 over d x G)", kMap},
    {"margin", Kind::number, "3", "safety factor of the admissible gradient window", kOptimize},
    {"t", Kind::time, "20ms", "echo time of the simulated sequence [time]", kMc},
    {"n_walkers", Kind::integer, "100000", "number of walkers (>= 1000)", kMc},
    {"dt", Kind::time, "0.005ms", "walk time step [time]", kMc},
    {"seed", Kind::integer, "", "random seed (required)", kMc},
    {"bins", Kind::integer, "64", "phase histogram bins", kMc},
    {"histogram", Kind::text, "", "phase histogram CSV path", kMc, false},
    {"threads", Kind::integer, "0", "worker threads, 0 = all cores", kMap | kMc, false},
    {"output", Kind::text, "", "CSV path (stdout when empty)", kSignal | kOptimize | kMap | kMc, false},
    {"plot_script", Kind::text, "", "gnuplot script path", kSignal | kMap, false},
};
// clang-format on

const KeySpec* find_key(const std::string& name) {
    for (const auto& k : kKeys) {
        if (name == k.name) return &k;
    }
    return nullptr;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!find_key(key)) throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        values[key] = trim(line.substr(eq + 1));
    }
    return values;
}

Dimension dimension_of(Kind k) {
    switch (k) {
        case Kind::length: return Dimension::length;
        case Kind::time: return Dimension::time;
        case Kind::gradient: return Dimension::gradient;
        default: return Dimension::diffusivity;
    }
}

double parse_number(const std::string& key, const std::string& text, std::string* rest = nullptr) {
    const std::string s = trim(text);
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ConfigError("key '" + key + "': cannot parse number from '" + text + "'");
    const std::string tail = trim(std::string(end));
    if (rest) {
        *rest = tail;
    } else if (!tail.empty()) {
        throw ConfigError("key '" + key + "': trailing characters in '" + text + "'");
    }
    return v;
}

double parse_quantity(const std::string& key, Kind kind, const std::string& text) {
    std::string unit;
    const double v = parse_number(key, text, &unit);
    if (unit.empty()) throw ConfigError("key '" + key + "': missing unit suffix in '" + text + "'");
    const UnitInfo* info = nullptr;
    try {
        info = &unit_info(unit);
    } catch (const std::invalid_argument&) {
        throw ConfigError("key '" + key + "': unknown unit '" + unit + "'");
    }
    if (info->dimension != dimension_of(kind)) {
        throw ConfigError("key '" + key + "': unit '" + unit + "' has the wrong dimension");
    }
    return v * info->to_si;
}

/// Resolved configuration for one subcommand.
class RunConfig {
public:
    RunConfig(unsigned command, std::map<std::string, std::string> raw) : command_(command), raw_(std::move(raw)) {
        for (const auto& [key, value] : raw_) {
            const auto* spec = find_key(key);
            if (!spec) throw ConfigError("unknown key '" + key + "'");
        }
    }

    [[nodiscard]] bool has(const std::string& key) const {
        const auto it = raw_.find(key);
        if (it != raw_.end()) return !it->second.empty();
        return find_key(key)->fallback[0] != '\0';
    }

    [[nodiscard]] std::string text(const std::string& key) const {
        const auto it = raw_.find(key);
        if (it != raw_.end()) return it->second;
        return find_key(key)->fallback;
    }

    [[nodiscard]] double quantity(const std::string& key) const {
        const auto* spec = find_key(key);
        const std::string s = text(key);
        if (s.empty()) throw ConfigError("key '" + key + "' is required");
        double v;
        if (spec->kind == Kind::number) {
            v = parse_number(key, s);
        } else if (spec->kind == Kind::time && (s == "inf" || s == "infinity")) {
            return kInfinity;
        } else {
            v = parse_quantity(key, spec->kind, s);
        }
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("key '" + key + "' must be positive and finite");
        return v;
    }

    [[nodiscard]] long long integer(const std::string& key, long long min_value) const {
        const std::string s = text(key);
        if (s.empty()) throw ConfigError("key '" + key + "' is required");
        std::size_t pos = 0;
        long long v;
        try {
            v = std::stoll(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': cannot parse integer from '" + s + "'");
        }
        if (pos != s.size()) throw ConfigError("key '" + key + "': trailing characters in '" + s + "'");
        if (v < min_value) throw ConfigError("key '" + key + "' must be at least " + std::to_string(min_value));
        return v;
    }

    [[nodiscard]] std::vector<double> list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(text(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const double v = parse_number(key, item);
            if (!(v > 0.0)) throw ConfigError("key '" + key + "' entries must be positive");
            out.push_back(v);
        }
        return out;
    }

    /// Resolved values in SI, one comment line per key.
    [[nodiscard]] std::string header() const {
        std::string out;
        char buf[256];
        for (const auto& spec : kKeys) {
            if (!(spec.commands & command_) || !spec.in_header) continue;
            std::string value = text(spec.name);
            if (!value.empty()) {
                switch (spec.kind) {
                    case Kind::length:
                    case Kind::time:
                    case Kind::gradient:
                    case Kind::diffusivity: {
                        const double v = quantity(spec.name);
                        static const char* si[] = {"m", "s", "T/m", "m2/s"};
                        std::snprintf(buf, sizeof buf, "%.12g %s", v, si[static_cast<int>(spec.kind)]);
                        value = buf;
                        break;
                    }
                    default: break;
                }
            }
            out += "# " + std::string(spec.name) + " = " + value + "\n";
        }
        return out;
    }

private:
    unsigned command_;
    std::map<std::string, std::string> raw_;
};

// ---------------------------------------------------------------------------

TissueModel tissue_from(const RunConfig& cfg) {
    const Geometry g = [&] {
        try {
            return geometry_from_string(cfg.text("geometry"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("key 'geometry': ") + e.what());
        }
    }();
    const double D0 = cfg.quantity("D0");
    const double T2 = cfg.quantity("T2");
    if (g == Geometry::generic_lorentzian) return TissueModel::lorentzian(cfg.quantity("ell_c"), D0, T2);
    if (cfg.has("ell_c")) {
        throw ConfigError("key 'ell_c' only applies to geometry=lorentzian");
    }
    return TissueModel::make(g, cfg.quantity("size"), D0, T2);
}

SequenceFamily family_from(const RunConfig& cfg) {
    const std::string s = cfg.text("sequence");
    if (s == "hahn") return SequenceFamily::hahn();
    if (s == "pgse") {
        try {
            return SequenceFamily::pgse(cfg.quantity("delta_fraction"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("key 'delta_fraction': ") + e.what());
        }
    }
    throw ConfigError("key 'sequence': expected hahn|pgse, got '" + s + "'");
}

SignalModel model_from(const RunConfig& cfg) {
    const std::string spectrum = cfg.text("spectrum");
    if (spectrum != "lorentzian" && spectrum != "expansion") {
        throw ConfigError("key 'spectrum': expected lorentzian|expansion");
    }
    Engine engine;
    try {
        engine = engine_from_string(cfg.text("method"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("key 'method': ") + e.what());
    }
    try {
        return SignalModel(tissue_from(cfg), family_from(cfg), engine, cfg.quantity("gamma"),
                           spectrum == "lorentzian", static_cast<int>(cfg.integer("truncation", 1)));
    } catch (const UnsupportedModelError& e) {
        throw ConfigError(std::string("key 'method': ") + e.what());
    }
}

unsigned threads_from(const RunConfig& cfg) { return static_cast<unsigned>(cfg.integer("threads", 0)); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Writes to the `output` path, or stdout when it is empty.
void emit(const RunConfig& cfg, const std::string& body) {
    const std::string path = cfg.text("output");
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("key 'output': cannot write '" + path + "'");
    out << body;
}

void emit_plot_script(const RunConfig& cfg, const std::string& script) {
    const std::string path = cfg.text("plot_script");
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("key 'plot_script': cannot write '" + path + "'");
    out << script;
}

std::string data_ref(const RunConfig& cfg) {
    const std::string path = cfg.text("output");
    return path.empty() ? "data.csv" : path;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_bound(bool json, bool check) {
    const auto b = ultimate_bound();
    char buf[512];
    double residual = 0.0, oracle_minus_ln = 0.0, oracle_eps = 0.0;
    if (check) {
        // Direct minimization of the contrast envelope over −ln M.
        const auto m = brent_minimize([](double x) { return error_lower_envelope(std::exp(-x)); }, 0.05, 5.0, 1e-12);
        oracle_minus_ln = m.x;
        oracle_eps = m.fx;
        residual = std::abs(m.x - b.minus_ln_M);
    }
    if (json) {
        std::snprintf(buf, sizeof buf, "{\"epsilon_0\": %.10g, \"M_0\": %.10g, \"minus_ln_M0\": %.10g", b.epsilon_0,
                      b.M_opt, b.minus_ln_M);
        std::cout << buf;
        if (check) {
            std::snprintf(buf, sizeof buf,
                          ", \"oracle_minus_ln_M0\": %.10g, \"oracle_epsilon_0\": %.10g, \"residual\": %.3g",
                          oracle_minus_ln, oracle_eps, residual);
            std::cout << buf;
        }
        std::cout << "}\n";
    } else {
        std::snprintf(buf, sizeof buf, "epsilon_0 = %.10g\nM_0 = %.10g\nminus_ln_M0 = %.10g\n", b.epsilon_0, b.M_opt,
                      b.minus_ln_M);
        std::cout << buf;
        if (check) {
            std::snprintf(buf, sizeof buf, "oracle_minus_ln_M0 = %.10g\noracle_epsilon_0 = %.10g\nresidual = %.3g\n",
                          oracle_minus_ln, oracle_eps, residual);
            std::cout << buf;
        }
    }
    return 0;
}

int cmd_signal(const RunConfig& cfg) {
    const auto model = model_from(cfg);
    const auto& tissue = model.tissue();
    const long long n = cfg.integer("t_points", 0);
    if (n == 0) throw ConfigError("key 't_points': the t grid is empty");
    const double t_min = cfg.quantity("t_min"), t_max = cfg.quantity("t_max");
    if (t_max < t_min) throw ConfigError("key 't_max' must not be below 't_min'");

    std::vector<double> gradients;
    if (cfg.has("ratios")) {
        for (double r : cfg.list("ratios")) gradients.push_back(gradient_for_scale_ratio(tissue, r, model.gamma()));
    }
    if (cfg.has("G")) gradients.push_back(cfg.quantity("G"));
    if (gradients.empty()) throw ConfigError("set 'G' or 'ratios'");

    const bool with_T2 = tissue.has_relaxation();
    std::string body = cfg.header();
    body += "t_s,beta,M_norm,M_norm_T2,G_T_per_m,is_t_opt\n";
    const auto grid = log_grid(t_min, t_max, static_cast<std::size_t>(n));
    for (double G : gradients) {
        std::optional<double> t_opt;
        try {
            t_opt = optimal_time(model, G, with_T2).t_opt;
        } catch (const NoOptimumError&) {
        }
        std::vector<std::pair<double, bool>> times;
        for (double t : grid) times.emplace_back(t, false);
        if (t_opt) times.emplace_back(*t_opt, true);
        std::stable_sort(times.begin(), times.end(), [](auto& a, auto& b) { return a.first < b.first; });
        for (const auto& [t, is_opt] : times) {
            const auto p = qfi(model, G, t, with_T2);
            body += fmt(t) + "," + fmt(p.beta) + "," + fmt(p.M_norm) + "," + fmt(p.M_norm_T2) + "," + fmt(G) + "," +
                    (is_opt ? "1" : "0") + "\n";
        }
    }
    emit(cfg, body);
    emit_plot_script(cfg,
                     "set datafile separator ','\nset logscale x\nset xlabel 't [s]'\nset ylabel 'M'\n"
                     "plot '" + data_ref(cfg) + "' using 1:3 with lines title 'M_norm', \\\n"
                     "     '' using ($6 == 1 ? $1 : 1/0):3 with points pt 6 title 't_opt'\n");
    return 0;
}

int cmd_optimize(const RunConfig& cfg) {
    const auto model = model_from(cfg);
    const auto& tissue = model.tissue();
    const bool with_T2 = tissue.has_relaxation();
    const auto window = gradient_window(tissue, model.gamma(), cfg.quantity("margin"));
    const bool infeasible = with_T2 && window.empty();

    OptimizationOutcome o;
    if (cfg.has("G")) {
        o = optimal_time(model, cfg.quantity("G"), with_T2);
    } else {
        const double lo = cfg.quantity("G_min"), hi = cfg.quantity("G_max");
        if (!(hi > lo)) throw ConfigError("key 'G_max' must exceed 'G_min'");
        o = optimal_protocol(model, lo, hi, with_T2);
    }
    const auto count = measurements_needed(o.epsilon_at_opt);

    std::vector<std::pair<std::string, std::string>> rows = {
        {"status", infeasible ? "infeasible_under_T2" : "ok"},
        {"G_T_per_m", fmt(o.G)},
        {"t_opt_s", fmt(o.t_opt)},
        {"closed_form_t_opt_s", fmt(o.closed_form_t_opt)},
        {"efficiency_parameter", fmt(o.validity)},
        {"epsilon", fmt(o.epsilon_at_opt)},
        {"epsilon_0", fmt(epsilon_0())},
        {"M_norm", fmt(o.precision.M_norm)},
        {"M_norm_T2", fmt(o.precision.M_norm_T2)},
        {"N_equiv", fmt(count.ratio)},
        {"N_measurements", std::to_string(count.N)},
        {"G_low_T_per_m", fmt(window.G_low)},
        {"G_high_T_per_m", fmt(window.G_high)},
        {"at_boundary", o.at_boundary ? "1" : "0"},
    };
    if (infeasible) std::cerr << "warning: admissible gradient window is empty (infeasible under T2)\n";
    if (cfg.text("output").empty()) {
        for (const auto& [k, v] : rows) std::cout << k << " = " << v << "\n";
    } else {
        std::string body = cfg.header() + "key,value\n";
        for (const auto& [k, v] : rows) body += k + "," + v + "\n";
        emit(cfg, body);
    }
    return 0;
}

int cmd_map(const RunConfig& cfg) {
    const auto model = model_from(cfg);
    const std::string kind = cfg.text("map_kind");
    const auto G_grid = log_grid(cfg.quantity("G_min"), cfg.quantity("G_max"),
                                 static_cast<std::size_t>(cfg.integer("G_points", 1)));
    PrecisionMap map;
    if (kind == "tG") {
        const auto t_grid = log_grid(cfg.quantity("t_min"), cfg.quantity("t_max"),
                                     static_cast<std::size_t>(cfg.integer("t_points", 1)));
        map = precision_map_tG(model, G_grid, t_grid, threads_from(cfg));
    } else if (kind == "dG") {
        const auto d_grid = log_grid(cfg.quantity("d_min"), cfg.quantity("d_max"),
                                     static_cast<std::size_t>(cfg.integer("d_points", 1)));
        map = precision_map_dG(model, d_grid, G_grid, threads_from(cfg));
    } else {
        throw ConfigError("key 'map_kind': expected tG|dG");
    }
    std::ostringstream os;
    os << cfg.header();
    write_map_csv(os, map);
    emit(cfg, os.str());
    emit_plot_script(cfg, "set datafile separator ','\nset logscale xy\nset view map\n"
                          "set xlabel '" + map.axis1_name + "'\nset ylabel '" + map.axis2_name + "'\n"
                          "set cblabel '" + map.value_name + "'\n"
                          "splot '" + data_ref(cfg) + "' using 1:2:3 with points pt 5 palette notitle\n");
    return 0;
}

int cmd_mc(const RunConfig& cfg) {
    if (!cfg.has("seed")) throw ConfigError("key 'seed' is required for mc");
    const auto tissue = tissue_from(cfg);
    const auto family = family_from(cfg);
    McConfig mc;
    try {
        mc.geometry = mc_geometry_from(tissue.geometry());
    } catch (const McConfigError& e) {
        throw ConfigError(std::string("key 'geometry': ") + e.what());
    }
    mc.size = tissue.size();
    mc.D0 = tissue.D0();
    mc.gamma = cfg.quantity("gamma");
    mc.n_walkers = static_cast<std::uint64_t>(cfg.integer("n_walkers", 1000));
    mc.dt = cfg.quantity("dt");
    mc.seed = static_cast<std::uint64_t>(cfg.integer("seed", 0));
    mc.threads = threads_from(cfg);
    const double G = cfg.has("G") ? cfg.quantity("G") : 0.0;
    const double t = cfg.quantity("t");
    mc.waveform = family.waveform(G, t);
    try {
        mc.validate();
    } catch (const McConfigError& e) {
        throw ConfigError(e.what());
    }
    const auto r = simulate(mc);
    const auto spectrum = tissue_spectrum(tissue, false, static_cast<int>(cfg.integer("truncation", 1)));
    const double beta = G > 0.0 ? attenuation_freq(mc.waveform, spectrum, mc.gamma).beta : 0.0;

    std::string body = cfg.header();
    body += "M_estimate,std_error,mean_phase,phase_variance,n_walkers,steps,dt_s,M_analytic\n";
    body += fmt(r.M_estimate) + "," + fmt(r.std_error) + "," + fmt(r.mean_phase) + "," + fmt(r.phase_variance) + "," +
            std::to_string(r.n_walkers) + "," + std::to_string(r.steps) + "," + fmt(r.dt) + "," +
            fmt(std::exp(-beta)) + "\n";
    emit(cfg, body);

    const std::string hist_path = cfg.text("histogram");
    if (!hist_path.empty()) {
        std::ofstream out(hist_path, std::ios::binary);
        if (!out) throw ConfigError("key 'histogram': cannot write '" + hist_path + "'");
        out << cfg.header();
        write_histogram_csv(out, phase_histogram(r.phases, static_cast<std::size_t>(cfg.integer("bins", 1))));
    }
    return 0;
}

struct Subcommand {
    CLI::App* app;
    unsigned mask;
    std::string config_path;
    std::map<std::string, std::string> flags;
};

void add_key_options(Subcommand& sc) {
    sc.app->add_option("--config", sc.config_path, "flat key = value config file");
    for (const auto& k : kKeys) {
        if (!(k.commands & sc.mask)) continue;
        std::string help = k.help;
        if (k.fallback[0] != '\0') help += " (default " + std::string(k.fallback) + ")";
        sc.app->add_option(std::string("--") + k.name, sc.flags[k.name], help);
    }
}

RunConfig resolve(const Subcommand& sc) {
    std::map<std::string, std::string> values;
    if (!sc.config_path.empty()) {
        // a shared file may carry keys for other subcommands
        for (const auto& [key, value] : read_config_file(sc.config_path)) {
            if (find_key(key)->commands & sc.mask) values[key] = value;
        }
    }
    for (const auto& [key, value] : sc.flags) {
        if (sc.app->get_option("--" + key)->count() > 0) values[key] = value;
    }
    return RunConfig(sc.mask, values);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Precision limits for restriction-length estimation from diffusion spin-echo signals"};
    app.require_subcommand(1);

    bool json = false, check = false;
    auto* bound = app.add_subcommand("bound", "ultimate relative-error bound per measurement");
    bound->add_flag("--json", json, "machine-readable output");
    bound->add_flag("--check", check, "also run the direct minimization oracle");

    Subcommand signal{app.add_subcommand("signal", "decay curves with the optimal time marked"), kSignal, {}, {}};
    Subcommand optimize{app.add_subcommand("optimize", "optimal diffusion time, gradient window and N"), kOptimize,
                        {}, {}};
    Subcommand map{app.add_subcommand("map", "precision maps over (t, G) or (d, G)"), kMap, {}, {}};
    Subcommand mc{app.add_subcommand("mc", "random-walk validation of the attenuation model"), kMc, {}, {}};
    for (auto* sc : {&signal, &optimize, &map, &mc}) add_key_options(*sc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*bound) return cmd_bound(json, check);
        if (*signal.app) return cmd_signal(resolve(signal));
        if (*optimize.app) return cmd_optimize(resolve(optimize));
        if (*map.app) return cmd_map(resolve(map));
        if (*mc.app) return cmd_mc(resolve(mc));
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
