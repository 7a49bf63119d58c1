#include "desn/cli.hpp"
#include "desn/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"desn"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = desn::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path workdir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("desn_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t data_rows(const std::string& csv) {
    std::size_t n = 0;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#' && line != "s,y") ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("narma command") {
    const fs::path dir = workdir("narma");
    const auto a = (dir / "a.csv").string();
    const auto b = (dir / "b.csv").string();
    CHECK(run({"narma", "--length", "1200", "--tau", "5", "--seed", "1", "--out", a}).code == 0);
    CHECK(run({"narma", "--length", "1200", "--tau", "5", "--seed", "1", "--out", b}).code == 0);
    CHECK(data_rows(slurp(a)) == 1200);
    CHECK(slurp(a) == slurp(b));
    CHECK(fs::exists(a + ".manifest"));
    CHECK(slurp(a + ".manifest").find("output.0=" + a) != std::string::npos);
    CHECK(run({"narma", "--tau", "0", "--out", a}).code == 1);
}

TEST_CASE("train and predict") {
    const fs::path dir = workdir("train");
    const Outcome shallow = run({"train", "--arch", "shallow", "--N", "50", "--out", (dir / "s").string()});
    CHECK(shallow.code == 0);
    CHECK(shallow.out.find("train_nrmse=") != std::string::npos);
    CHECK(fs::exists(dir / "s" / "model.manifest"));
    CHECK(fs::exists(dir / "s" / "metrics.csv"));
    CHECK(fs::exists(dir / "s" / "run.manifest"));

    const Outcome same = run({"train", "--arch", "parallel", "--L", "3", "--same-member-seeds", "--out",
                              (dir / "p").string()});
    CHECK(same.code == 0);
    CHECK(same.out == shallow.out);

    const Outcome shortfall = run({"train", "--arch", "series", "--L", "3", "--train-length", "300", "--washout",
                                   "100", "--out", (dir / "x").string()});
    CHECK(shortfall.code == 2);
    CHECK(shortfall.err.find("washout shortfall") != std::string::npos);

    const auto data = (dir / "d.csv").string();
    REQUIRE(run({"narma", "--length", "800", "--seed", "3", "--out", data}).code == 0);
    const Outcome from_file =
        run({"train", "--data", data, "--train-length", "400", "--test-length", "400", "--out", (dir / "f").string()});
    CHECK(from_file.code == 0);
    const Outcome predicted = run({"predict", "--model", (dir / "f" / "model.manifest").string(), "--data", data,
                                   "--out", (dir / "pred.csv").string()});
    CHECK(predicted.code == 0);
    CHECK(predicted.out.find("nrmse=") == 0);
    CHECK(run({"predict", "--model", (dir / "missing.manifest").string(), "--data", data, "--out",
               (dir / "q.csv").string()})
              .code == 2);
}

TEST_CASE("mc command") {
    const fs::path dir = workdir("mc");
    const Outcome shallow = run({"mc", "--arch", "shallow", "--N", "20", "--r", "0.9", "--length", "5000", "--out",
                                 (dir / "mc.csv").string()});
    CHECK(shallow.code == 0);
    CHECK(shallow.out.find("theoretical=19.014781") != std::string::npos);
    const std::string csv = slurp(dir / "mc.csv");
    CHECK(csv.find("# kmax=40") != std::string::npos);
    CHECK(csv.find("\n40,") != std::string::npos);

    const Outcome parallel = run({"mc", "--arch", "parallel", "--L", "3", "--N", "20", "--r", "0.9", "--length", "5000"});
    CHECK(parallel.out.find("theoretical=19.014781") != std::string::npos);
    const Outcome series = run({"mc", "--arch", "series", "--L", "3", "--N", "20", "--r", "0.9", "--length", "5000"});
    CHECK(series.code == 0);
    CHECK(series.out.find("theoretical=absent") != std::string::npos);
    CHECK(run({"mc", "--r", "1.2"}).code == 1);
}

TEST_CASE("sweep command") {
    const fs::path dir = workdir("sweep");
    const auto prefix = (dir / "fig5").string();
    CHECK(run({"sweep", "--figure", "5", "--trials", "2", "--out", prefix}).code == 0);
    for (const char* suffix : {".csv", "_summary.csv", ".svg", ".manifest"}) CHECK(fs::exists(prefix + suffix));
    const std::string svg = slurp(prefix + ".svg");
    CHECK(svg.find("errorbar") != std::string::npos);

    const auto single = (dir / "one").string();
    CHECK(run({"sweep", "--figure", "5", "--trials", "1", "--out", single}).code == 0);
    CHECK(slurp(single + ".svg").find("errorbar") == std::string::npos);
    CHECK(slurp(single + ".csv").find("wall_ms") == std::string::npos);

    const auto again = (dir / "again").string();
    CHECK(run({"sweep", "--figure", "5", "--trials", "1", "--jobs", "2", "--out", again}).code == 0);
    CHECK(slurp(single + ".csv") == slurp(again + ".csv"));

    CHECK(run({"sweep", "--figure", "4", "--out", single}).code == 1);
}

TEST_CASE("verify command") {
    const Outcome ok = run({"verify", "--N", "4", "--r", "0.7", "--trials", "10"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("FAIL") == std::string::npos);
    CHECK(run({"verify", "--N", "1", "--mc-length", "0"}).code == 0);
    CHECK(run({"verify", "--r", "1.0"}).code == 1);
}

TEST_CASE("config file with flag override") {
    const fs::path dir = workdir("config");
    const fs::path ini = dir / "run.ini";
    {
        std::ofstream f(ini);
        f << "[narma]\nlength=321\ntau=4\nout=" << (dir / "from_config.csv").string() << "\n";
    }
    CHECK(run({"--config", ini.string(), "narma"}).code == 0);
    CHECK(data_rows(slurp(dir / "from_config.csv")) == 321);
    CHECK(run({"--config", ini.string(), "narma", "--length", "50"}).code == 0);
    CHECK(data_rows(slurp(dir / "from_config.csv")) == 50);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"bogus"}).code == 1);
    CHECK(run({"train", "--arch", "stacked", "--out", "x"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}
