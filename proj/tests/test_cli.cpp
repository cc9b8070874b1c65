#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(DPREC_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

}  // namespace

TEST(Cli, Bound) {
    const auto r = run("bound");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("epsilon_0 = 0.6213168782"), std::string::npos);
    EXPECT_NE(r.out.find("minus_ln_M0 = 0.79681213"), std::string::npos);
    const auto j = run("bound --json --check");
    EXPECT_EQ(j.code, 0);
    EXPECT_EQ(j.out.front(), '{');
    EXPECT_NE(j.out.find("\"residual\""), std::string::npos);
}

TEST(Cli, HelpDocumentsKeys) {
    for (const char* sub : {"signal", "optimize", "map", "mc"}) {
        const auto r = run(std::string(sub) + " --help");
        EXPECT_EQ(r.code, 0) << sub;
        EXPECT_NE(r.out.find("--D0"), std::string::npos) << sub;
        EXPECT_NE(r.out.find("cm2/s"), std::string::npos) << sub;
    }
    EXPECT_NE(run("map --help").out.find("--t_min"), std::string::npos);
    EXPECT_NE(run("mc --help").out.find("--seed"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("signal --t_points 0 --G 40mT/m").code, 2);
    EXPECT_EQ(run("signal --G 40").code, 2);
    EXPECT_EQ(run("signal --G 40ms").code, 2);
    EXPECT_EQ(run("signal --size -3um --G 40mT/m").code, 2);
    EXPECT_EQ(run("optimize --method hahn --sequence pgse").code, 2);
    EXPECT_EQ(run("mc --geometry planar").code, 2);  // seed required
    EXPECT_EQ(run("signal --bogus 1").code, 2);
    const auto cfg = temp_path("bad.cfg");
    std::ofstream(cfg) << "size = 10um\nwibble = 3\n";
    EXPECT_EQ(run("optimize --config " + cfg).code, 2);
}

TEST(Cli, ConfigFileAndOverride) {
    const auto cfg = temp_path("fig3.cfg");
    std::ofstream(cfg) << "# tissue\nsize = 10 um\nD0 = 1e-5cm2/s\nT2 = 0.1s\nG = 40mT/m\nseed = 4\n";
    const auto a = run("optimize --config " + cfg);
    EXPECT_EQ(a.code, 0);
    EXPECT_NE(a.out.find("G_T_per_m = 0.04\n"), std::string::npos);
    const auto b = run("optimize --config " + cfg + " --G 4G/cm");
    EXPECT_NE(b.out.find("G_T_per_m = 0.04\n"), std::string::npos);
    const auto c = run("optimize --config " + cfg + " --G 60mT/m");
    EXPECT_NE(c.out.find("G_T_per_m = 0.06\n"), std::string::npos);
    EXPECT_NE(c.out.find("N_measurements = "), std::string::npos);
}

TEST(Cli, InfeasibleWindowIsReported) {
    const auto r = run("optimize --size 60um --T2 100ms --G 10mT/m");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("status = infeasible_under_T2"), std::string::npos);
}

TEST(Cli, SignalMarksOptimum) {
    const auto r = run("signal --size 10um --ratios 0.1,0.15,0.25,0.4,1 --t_points 20");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("t_s,beta,M_norm,M_norm_T2,G_T_per_m,is_t_opt\n"), std::string::npos);
    std::istringstream in(r.out);
    std::string line;
    int rows = 0, marked = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        ++rows;
        if (line.back() == '1') ++marked;
    }
    EXPECT_EQ(marked, 5);
    EXPECT_EQ(rows, 5 * 21);
}

TEST(Cli, SignalEnginesAgree) {
    auto column = [](const std::string& out) {
        std::vector<double> beta;
        std::istringstream in(out);
        std::string line;
        while (std::getline(in, line)) {
            // the optimum row sits at an engine-dependent t
            if (line.empty() || line[0] == '#' || line[0] == 't' || line.back() == '1') continue;
            beta.push_back(std::stod(line.substr(line.find(',') + 1)));
        }
        return beta;
    };
    const std::string base = "signal --size 10um --G 50mT/m --t_points 8 ";
    const auto h = column(run(base + "--method hahn").out);
    const auto t = column(run(base + "--method time").out);
    const auto f = column(run(base + "--method freq").out);
    ASSERT_EQ(h.size(), f.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        EXPECT_NEAR(t[i] / h[i], 1.0, 1e-9);
        EXPECT_NEAR(f[i] / h[i], 1.0, 1e-6);
    }
}

TEST(Cli, MapWritesPlotScript) {
    const auto csv = temp_path("map.csv"), gp = temp_path("map.gp");
    const auto r = run("map --T2 100ms --t_points 5 --G_points 4 --output " + csv + " --plot_script " + gp);
    EXPECT_EQ(r.code, 0);
    std::ifstream in(csv);
    std::string all((std::istreambuf_iterator<char>(in)), {});
    EXPECT_NE(all.find("# axis1=t_s axis2=G_T_per_m value=eps0_over_eps\n"), std::string::npos);
    EXPECT_NE(all.find("# T2 = 0.1 s\n"), std::string::npos);
    std::ifstream script(gp);
    std::string s((std::istreambuf_iterator<char>(script)), {});
    EXPECT_NE(s.find(csv), std::string::npos);
}
