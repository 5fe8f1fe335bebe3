#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli_path() {
    const char* p = std::getenv("JC_CLI");
    return p ? p : "";
}

int run(const std::string& args) {
    const int status = std::system((cli_path() + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("cli: construct, verify and bounds round trip" * doctest::skip(cli_path().empty())) {
    CHECK(run("construct --code 'pairing(6)' --phi 0.4 --out /tmp/jc_test_code.json") == 0);
    CHECK(run("verify --code /tmp/jc_test_code.json --d 1") == 0);
    CHECK(run("verify --code builtin-833 --d 3") == 0);
    CHECK(run("verify --code 'pairing(4)' --d 2") == 2); // a one-jump code at order two
    CHECK(run("bounds --N 8 --d 3 --out /tmp/jc_test_bounds.csv") == 0);
    const std::string bounds = slurp("/tmp/jc_test_bounds.csv");
    CHECK(bounds.find("6,3,1,10,10,pairing") != std::string::npos);
    CHECK(bounds.find("8,4,3,5,3,builtin-833") != std::string::npos);
    CHECK(bounds.find("4,2,1,3,3,pairing") != std::string::npos);
}

TEST_CASE("cli: invalid input gives exit 1" * doctest::skip(cli_path().empty())) {
    CHECK(run("verify --code 'pairing(5)'") == 1);       // odd qubit count
    CHECK(run("verify --code nonsense-spec") == 1);      // unreadable
    CHECK(run("memory --q 0.5x") == 1);                  // bad sweep list
    CHECK(run("no-such-command") != 0);
}

TEST_CASE("cli: outputs are byte-identical across thread counts" *
          doctest::skip(cli_path().empty())) {
    const std::string common =
        "memory --code 'pairing(4)' --q 0,0.3 --n-traj 1000 --seed 99 --out ";
    CHECK(run(common + "/tmp/jc_rep_a.csv --threads 1") == 0);
    CHECK(run(common + "/tmp/jc_rep_b.csv --threads 2") == 0);
    const std::string a = slurp("/tmp/jc_rep_a.csv");
    CHECK(!a.empty());
    CHECK(a == slurp("/tmp/jc_rep_b.csv"));
    CHECK(a.find("# seed 99") != std::string::npos);
    // sidecar with the imperfection settings
    CHECK(slurp("/tmp/jc_rep_a.csv.config.json").find("\"q\": 0.3") != std::string::npos);
}

TEST_CASE("cli: config file values are used and flags override them" *
          doctest::skip(cli_path().empty())) {
    {
        std::ofstream cfg("/tmp/jc_test.cfg");
        cfg << "code = \"pairing(4)\"\n";
        cfg << "d = 2\n";
    }
    // config file alone: order-two check on the pairing code fails
    CHECK(run("verify --config /tmp/jc_test.cfg") == 2);
    // flag overrides the config's order
    CHECK(run("verify --config /tmp/jc_test.cfg --d 1") == 0);
}

TEST_CASE("cli: environment variable supplies the default seed" *
          doctest::skip(cli_path().empty())) {
    const std::string cmd = "JUMPCODE_SEED=777 " + cli_path() +
                            " memory --code 'pairing(4)' --q 0 --n-traj 64"
                            " --out /tmp/jc_env_seed.csv > /dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(slurp("/tmp/jc_env_seed.csv").find("# seed 777") != std::string::npos);
}

TEST_CASE("cli: json format emits the sweep as a document" *
          doctest::skip(cli_path().empty())) {
    CHECK(run("memory --code 'pairing(4)' --q 0 --n-traj 64 --seed 5 --format json"
              " --out /tmp/jc_sweep.json") == 0);
    const std::string text = slurp("/tmp/jc_sweep.json");
    CHECK(text.find("\"rows\"") != std::string::npos);
    CHECK(text.find("\"mean_fidelity\"") != std::string::npos);
    CHECK(text.find("\"config_hash\"") != std::string::npos);
}

TEST_CASE("cli: trajectory-check validates the two integrators against each other" *
          doctest::skip(cli_path().empty())) {
    CHECK(run("trajectory-check --n-traj 2000 --seed 3 --out /tmp/jc_check.txt") == 0);
    CHECK(slurp("/tmp/jc_check.txt").find("consistent yes") != std::string::npos);
}
