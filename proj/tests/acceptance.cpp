// Acceptance suite: one PASS/FAIL line per criterion, with timings.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dprec/dprec.hpp"

using namespace dprec;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string format(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::string shell(const std::string& args, int* code = nullptr) {
    const std::string cmd = std::string(DPREC_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    if (code) *code = status;
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

double value_after(const std::string& text, const std::string& key) {
    const auto p = text.find(key + " = ");
    if (p == std::string::npos) return std::nan("");
    return std::stod(text.substr(p + key.size() + 3));
}

double gradient_for_validity(const TissueModel& tissue, double v) {
    const double tau = tissue.tau_c();
    return std::sqrt(v / (kProtonGamma * kProtonGamma * tissue.D0() * tau * tau * tau));
}

// ---------------------------------------------------------------------------

Outcome ultimate_bound_check() {
    const auto b = ultimate_bound();
    const auto oracle =
        brent_minimize([](double x) { return std::sqrt(-std::expm1(-2 * x)) / (4 * x * std::exp(-x)); }, 0.05, 5.0,
                       1e-12);
    const double diff = std::max(std::abs(oracle.x - b.minus_ln_M), std::abs(oracle.fx - b.epsilon_0));
    int code = 0;
    const auto out = shell("bound", &code);
    const double eps = value_after(out, "epsilon_0"), mlm = value_after(out, "minus_ln_M0");
    const bool ok = code == 0 && eps >= 0.620 && eps <= 0.623 && mlm >= 0.796 && mlm <= 0.798 && diff < 1e-6;
    return {ok, format("epsilon_0=%.10g -lnM0=%.10g oracle residual=%.2e", eps, mlm, diff)};
}

Outcome hahn_adjudication() {
    const double D0 = 1e-9, G = 0.05;
    const auto tissue = TissueModel::lorentzian(4e-6, D0);
    const double tau = tissue.tau_c();
    const double K = kProtonGamma * kProtonGamma * G * G * D0;
    double worst = 0.0, printed_best = 1e300;
    for (int i = 0; i < 50; ++i) {
        const double t = tau * std::pow(10.0, -2.0 + 4.0 * i / 49);
        const double exact = time_domain_beta(hahn_waveform(G, t), tau, D0, kProtonGamma);
        worst = std::max(worst, std::abs(hahn_closed_form(tissue, G, t, kProtonGamma).beta / exact - 1));
        const double x = t / tau;
        const double printed = K * tau * tau * t * (1 - x * (3 + std::exp(-x) - 4 * std::exp(-x / 2)));
        if (x > 1) printed_best = std::min(printed_best, std::abs(printed / exact - 1));
    }
    return {worst < 1e-10 && printed_best > 1.0,
            format("max rel err (tau_c/t bracket)=%.2e; printed t/tau_c bracket min rel err (t>tau_c)=%.2e", worst,
                   printed_best)};
}

Outcome engine_equivalence() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double D0 = 1e-9;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double tau = 1e-3 * std::pow(10.0, 2 * u(rng) - 1);
        const double t = tau * std::pow(10.0, 4 * u(rng) - 2);
        const double delta = t * (0.02 + 0.48 * u(rng));
        const double G = 0.005 + 0.3 * u(rng);
        const auto w = pgse_waveform({delta, t - delta, G});
        const SpectralDensity s({{1.0, tau}}, D0);
        worst = std::max(worst, std::abs(attenuation_freq(w, s, kProtonGamma).beta /
                                             attenuation_time_exact(w, s, kProtonGamma).beta -
                                         1));
    }
    return {worst < 1e-6, format("max rel diff over 100 PGSE configs=%.2e", worst)};
}

Outcome asymptotics() {
    const double D0 = 1e-9, G = 0.03;
    const auto tissue = TissueModel::lorentzian(5e-6, D0);
    const double tau = tissue.tau_c();
    const double K = kProtonGamma * kProtonGamma * G * G * D0;
    const double tl = 1e3 * tau, ts = 1e-3 * tau;
    const double rl = hahn_closed_form(tissue, G, tl, kProtonGamma).beta / (K * tau * tau * tl);
    const double rs = hahn_closed_form(tissue, G, ts, kProtonGamma).beta / (K * ts * ts * ts / 12);
    return {std::abs(rl - 1) < 0.01 && std::abs(rs - 1) < 0.01,
            format("long-time ratio=%.6f short-time ratio=%.6f", rl, rs)};
}

Outcome length_scaling() {
    const double D0 = 1e-9, G = 0.02, t = 2.0;
    const auto a = TissueModel::lorentzian(2e-6, D0), b = TissueModel::lorentzian(4e-6, D0);
    const double closed = hahn_closed_form(b, G, t, kProtonGamma).beta / hahn_closed_form(a, G, t, kProtonGamma).beta;
    const auto w = hahn_waveform(G, t);
    const double freq = attenuation_freq(w, lorentzian_spectrum(b), kProtonGamma).beta /
                        attenuation_freq(w, lorentzian_spectrum(a), kProtonGamma).beta;
    const auto pa = geometry_spectrum({Geometry::planar, 5e-6, 50}, D0);
    const auto pb = geometry_spectrum({Geometry::planar, 10e-6, 50}, D0);
    const double planar = attenuation_freq(w, pb, kProtonGamma).beta / attenuation_freq(w, pa, kProtonGamma).beta;
    const bool ok = std::abs(closed / 16 - 1) < 0.02 && std::abs(freq / 16 - 1) < 0.02 &&
                    std::abs(planar / 16 - 1) < 0.02;
    return {ok, format("beta/t ratio on doubling: closed=%.4f freq=%.4f slab expansion=%.4f", closed, freq, planar)};
}

Outcome bound_attainment() {
    const auto tissue = TissueModel::lorentzian(3e-6, 1e-9);
    const SignalModel model(tissue);
    std::string detail;
    bool ok = true;
    for (double v : {1e-4, 1e-3, 1e-2}) {
        const double r = optimal_time(model, gradient_for_validity(tissue, v), false).epsilon_at_opt / epsilon_0();
        ok = ok && r <= 1.02;
        detail += format("v=%.0e: %.4f; ", v, r);
    }
    const double r1 = optimal_time(model, gradient_for_validity(tissue, 1.0), false).epsilon_at_opt / epsilon_0();
    ok = ok && r1 > 1.2;
    detail += format("v=1: %.4f; locus", r1);
    double prev = 0.0;
    for (double q : {1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0}) {
        const double e = optimal_time(model, gradient_for_validity(tissue, std::pow(q, 6)), false).epsilon_at_opt;
        ok = ok && e > prev;
        prev = e;
        detail += format(" %.3g", e / epsilon_0());
    }
    return {ok, "eps/eps0 " + detail};
}

Outcome closed_form_time() {
    const auto tissue = TissueModel::lorentzian(3e-6, 1e-9);
    const SignalModel model(tissue);
    bool ok = true;
    std::string detail = "t_opt/closed:";
    for (double v : {1e-5, 1e-4, 1e-3, 1e-2}) {
        const auto o = optimal_time(model, gradient_for_validity(tissue, v), false);
        const double r = o.t_opt / o.closed_form_t_opt;
        ok = ok && std::abs(r - 1) <= 0.05;
        detail += format(" v=%.0e:%.4f", v, r);
    }
    return {ok, detail};
}

Outcome relaxation_chain() {
    const double T2 = 0.1;
    const SignalModel model(TissueModel::cylinder(10e-6, 1e-9, T2));
    const auto G = log_grid(1e-3, 1.0, 100), t = log_grid(1e-3, 1.0, 100);
    const auto map = precision_map_tG(model, G, t, 0);
    bool bound_ok = true;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = 0; j < G.size(); ++j) {
            // ε₀/ε ≤ e^{−t/T2}
            if (map.at(i, j) > std::exp(-t[i] / T2) * (1 + 1e-9)) bound_ok = false;
            if (map.at(i, j) > map.at(bi, bj)) {
                bi = i;
                bj = j;
            }
        }
    }
    const bool interior = bi > 0 && bi + 1 < t.size() && bj > 0 && bj + 1 < G.size();
    std::vector<double> slice;
    for (double g : G) slice.push_back(qfi(model, g, 0.043, true).epsilon_T2);
    std::size_t k = 0;
    while (k + 1 < slice.size() && slice[k + 1] < slice[k]) ++k;
    std::size_t m = k;
    while (m + 1 < slice.size() && slice[m + 1] > slice[m]) ++m;
    const bool unimodal = m + 1 == slice.size() && k > 0 && k + 1 < slice.size();
    return {bound_ok && interior && unimodal,
            format("bound held=%g, optimum t=%.4g s G=%.4g T/m, 43 ms slice minimum at G=%.4g T/m", bound_ok, t[bi],
                   G[bj], G[k]) +
                (unimodal ? " (unimodal)" : " (NOT unimodal)")};
}

Outcome window_trend() {
    const SignalModel base(TissueModel::cylinder(10e-6, 1e-9, 0.1));
    double prevG = 1e300, prevN = 0.0;
    bool ok = true;
    std::string detail;
    for (double d : {1e-6, 5e-6, 10e-6, 20e-6}) {
        const auto o = optimal_protocol(base.with_tissue(TissueModel::cylinder(d, 1e-9, 0.1)), 1e-3, 1e3, true);
        ok = ok && o.G < prevG && o.N_equiv_at_opt > prevN;
        prevG = o.G;
        prevN = o.N_equiv_at_opt;
        detail += format("d=%gum: G=%.4g T/m N=%.4g; ", d * 1e6, o.G, o.N_equiv_at_opt);
    }
    return {ok, detail};
}

Outcome monte_carlo() {
    const double a = 10e-6, D0 = 1e-9, t = 0.02;
    const auto s = geometry_spectrum({Geometry::planar, a, 50}, D0);
    const double b0 = attenuation_freq(hahn_waveform(0.1, t), s, kProtonGamma).beta;
    const double G = 0.1 * std::sqrt(0.3 / b0);
    McConfig cfg;
    cfg.geometry = McGeometry::planar;
    cfg.size = a;
    cfg.D0 = D0;
    cfg.n_walkers = 100000;
    cfg.dt = 5e-6;
    cfg.seed = 20240611;
    cfg.waveform = hahn_waveform(G, t);
    cfg.keep_positions = true;
    const auto r = simulate(cfg);
    const double M = std::exp(-attenuation_freq(cfg.waveform, s, kProtonGamma).beta);
    const double z = std::abs(r.M_estimate - M) / r.std_error;
    const double phase_z = std::abs(r.mean_phase) / (std::sqrt(r.phase_variance) / std::sqrt(double(r.n_walkers)));
    const auto u = equilibrium_uniformity(r.final_x, cfg.geometry, a);
    return {z <= 2 && phase_z <= 3 && u.p_value > 0.01,
            format("M_mc=%.5f M_analytic=%.5f (%.2f SE); <phi> z=%.2f;", r.M_estimate, M, z, phase_z) +
                format(" chi2=%.2f p=%.3f (G=%.5g T/m)", u.chi_square, u.p_value, G)};
}

Outcome determinism() {
    const std::string dir = "/tmp/dprec_acceptance_";
    struct Case {
        std::string name, args;
    };
    const std::vector<Case> cases = {
        {"signal", "signal --size 10um --T2 100ms --ratios 0.1,1 --t_points 30"},
        {"optimize", "optimize --size 10um --T2 100ms"},
        {"map_tG", "map --T2 100ms --t_points 40 --G_points 40"},
        {"map_dG", "map --map_kind dG --T2 100ms --d_points 12 --G_points 12"},
        {"mc", "mc --geometry sphere --size 8um --G 80mT/m --t 10ms --n_walkers 2000 --seed 5"},
    };
    bool ok = true;
    std::string failed;
    const bool bound_same = shell("bound --json") == shell("bound --json");
    ok = ok && bound_same;
    for (const auto& c : cases) {
        const bool threaded = c.name.rfind("map", 0) == 0 || c.name == "mc";
        std::vector<std::string> outs;
        for (int threads : {1, 4, 1}) {
            const std::string path = dir + c.name + std::to_string(outs.size()) + ".csv";
            std::string args = c.args + " --output " + path;
            if (threaded) args += " --threads " + std::to_string(threads);
            int code = 0;
            shell(args, &code);
            outs.push_back(code == 0 ? slurp(path) : std::string("exit ") + std::to_string(code));
        }
        if (!(outs[0] == outs[1] && outs[1] == outs[2]) || outs[0].empty()) {
            ok = false;
            failed += " " + c.name;
        }
    }
    return {ok, ok ? "bound, signal, optimize, map (tG, dG), mc byte-identical across runs and thread counts"
                   : "differences in:" + failed};
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"C1", "ultimate bound", 1, ultimate_bound_check},
        {"C2", "Hahn closed form vs exact time domain", 1, hahn_adjudication},
        {"C3", "frequency vs time-domain engines", 30, engine_equivalence},
        {"C4", "short- and long-time asymptotes", 1, asymptotics},
        {"C5", "fourth-power length scaling", 1, length_scaling},
        {"C6", "bound attainment vs efficiency parameter", 10, bound_attainment},
        {"C7", "closed-form optimal time", 10, closed_form_time},
        {"C8", "relaxation-degraded bound and (t, G) map", 120, relaxation_chain},
        {"C9", "gradient-window trend over size", 300, window_trend},
        {"C10", "Monte-Carlo validation", 300, monte_carlo},
        {"C11", "determinism across runs and threads", 600, determinism},
    };
    int passed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_s;
        const bool ok = o.pass && in_time;
        passed += ok;
        std::printf("[%s] %s %s: %s (%.2f s%s)\n", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("acceptance: %d/%zu criteria passed\n", passed, criteria.size());
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
