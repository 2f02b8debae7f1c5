#include "plantcap/survey_data.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace plantcap;

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "plantcap_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const std::string& tag,
                  const std::string& env_prefix = {}) {
    const fs::path out = work_dir() / (tag + ".out");
    const fs::path err = work_dir() / (tag + ".err");
    const std::string cmd = env_prefix + std::string(PLANTCAP_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int rc = std::system(cmd.c_str());
    return {rc == -1 ? -1 : WEXITSTATUS(rc), slurp(out), slurp(err)};
}

std::string strip_wall_time(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream kept;
    std::string line;
    while (std::getline(in, line))
        if (line.find("wall_time_ms") == std::string::npos) kept << line << "\n";
    return kept.str();
}

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("fit on a bundled city reports the survey estimates") {
    const RunResult r = run_cli("fit --model id --method mle --data snight:new_orleans",
                                "fit_no");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("H") != std::string::npos);
    CHECK(r.out.find("p_i_c") != std::string::npos);
    CHECK(r.out.find("H rounded: 68") != std::string::npos);
    // point estimate in the published neighborhood
    const bool h_ok = r.out.find("68.") != std::string::npos ||
                      r.out.find("69.") != std::string::npos;
    CHECK(h_ok);
}

TEST_CASE("degenerate basic-model data exit nonzero with a greppable code") {
    const fs::path csv = work_dir() / "no_yes.csv";
    {
        std::ofstream f(csv);
        f << "m_yes,m_mb,m_no,y\n0,5,6,11\n";
    }
    const RunResult r =
        run_cli("fit --model basic --method mle-closed --data " + csv.string(), "fit_deg");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("error[no_certain_captures]") != std::string::npos);
}

TEST_CASE("sampler settings are echoed in the report header") {
    const RunResult r = run_cli(
        "fit --model id --method mcmc --data snight:chicago --chains 2 --iters 600 "
        "--burnin 300 --seed 4",
        "fit_mcmc");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("chains=2 iterations=600 burn_in=300") != std::string::npos);
}

TEST_CASE("structured records are byte-identical across reruns") {
    const std::string args =
        "fit --model id --method mle --data snight:phoenix --format record --seed 9";
    const RunResult a = run_cli(args, "rec_a");
    const RunResult b = run_cli(args, "rec_b");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(strip_wall_time(a.out) == strip_wall_time(b.out));
    CHECK(a.out.find("\"build\"") != std::string::npos);
    CHECK(a.out.find("\"seed\": 9") != std::string::npos);
    CHECK(a.out.find("wall_time_ms") != std::string::npos);

    const std::string margs =
        "fit --model id --method mcmc --data snight:chicago --chains 2 --iters 600 "
        "--burnin 300 --format record --seed 12";
    const RunResult ma = run_cli(margs, "rec_ma");
    const RunResult mb = run_cli(margs, "rec_mb");
    REQUIRE(ma.exit_code == 0);
    CHECK(strip_wall_time(ma.out) == strip_wall_time(mb.out));
    CHECK(ma.out.find("rhat") != std::string::npos);
}

TEST_CASE("snight export round-trips through the loader") {
    const fs::path dir = work_dir() / "export";
    const RunResult r =
        run_cli("snight export --dir " + dir.string() + " --data-format csv", "export");
    REQUIRE(r.exit_code == 0);
    for (const auto& [key, counts] : snight_dataset()) {
        const ClassedCounts back =
            load_survey((dir / ("snight_" + key + ".csv")).string(), SurveyFormat::csv);
        CHECK(back.single().m_i == counts.m_i);
        CHECK(back.single().m_yes == counts.m_yes);
        CHECK(back.single().m_mb == counts.m_mb);
        CHECK(back.single().m_no == counts.m_no);
        CHECK(back.single().y == counts.y);
        CHECK(back.single().h_i == counts.h_i);
    }
}

TEST_CASE("simulate emits the delimited report") {
    const RunResult r = run_cli(
        "simulate --preset table1 --size small --method mle --replicates 2 --seed 3",
        "sim_small");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("method,m,parameter,true_value,estimate,sd,rbias,rrmse,cp,lci") == 0);
    CHECK(r.out.find("mle,15,H,150") != std::string::npos);
}

TEST_CASE("compare prints a side-by-side table") {
    const RunResult r = run_cli(
        "compare --model id --data snight:phoenix --methods mle,cb --seed 2", "compare");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("parameter") != std::string::npos);
    CHECK(r.out.find("mle") != std::string::npos);
    CHECK(r.out.find("cb") != std::string::npos);
    CHECK(r.out.find("96 / 102") != std::string::npos);
}

TEST_CASE("uncertainty propagation and draw export through the cli") {
    const fs::path draws = work_dir() / "up_draws";
    const RunResult r = run_cli(
        "fit --model id --method up --data snight:new_orleans --chains 2 --iters 800 "
        "--burnin 400 --seed 6 --dump-draws " + draws.string(), "fit_up");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("H0") != std::string::npos);
    CHECK(fs::exists(draws.string() + "_chain1.csv"));
    CHECK(fs::exists(draws.string() + "_chain2.csv"));
}

TEST_CASE("reports can be written to a file with --out") {
    const fs::path out = work_dir() / "fit_report.txt";
    const RunResult r = run_cli(
        "fit --model id --method mle --data snight:los_angeles --out " + out.string(),
        "fit_out");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.empty());
    CHECK(slurp(out).find("p_mb_ni") != std::string::npos);
}

TEST_CASE("compare refuses a single method") {
    const RunResult r =
        run_cli("compare --model id --data snight:phoenix --methods mle", "compare_one");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("error[bad_config]") != std::string::npos);
}

TEST_CASE("the environment variable seeds runs when --seed is absent") {
    const RunResult r = run_cli(
        "fit --model id --method mle --data snight:phoenix --format record", "env_seed",
        "PLANTCAP_SEED=33 ");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("\"seed\": 33") != std::string::npos);
}

TEST_CASE("snight baseline block lists the chapman-bailey pairs") {
    const RunResult r = run_cli("snight --method mle --baseline cb", "snight_cb");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("Chapman-Bailey baseline") != std::string::npos);
    CHECK(r.out.find("chicago") != std::string::npos);
    CHECK(r.out.find("new_york") != std::string::npos);
}

TEST_CASE("boundary flag reaches the snight output for chicago") {
    const RunResult r = run_cli("snight --city chicago --method mle", "snight_chi");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("boundary") != std::string::npos);
}

TEST_SUITE_END();
