#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace {

const std::string kCli = MOTKIT_CLI_PATH;

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("motkit_cli_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string run_capture(const std::string& args, const std::string& out_file) {
    const std::string cmd = kCli + " " + args + " >" + out_file + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) { /* output still captured */ }
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("simulate -> track -> eval pipeline scores a noiseless scenario perfectly") {
    TempDir dir;
    const std::string gt = dir.file("gt.txt");
    const std::string dets = dir.file("dets.txt");
    const std::string embs = dir.file("embs.jdeb");
    const std::string hyp = dir.file("hyp.txt");

    REQUIRE(run("simulate --frames 40 --targets 4 --embed-dim 16 --seed 11 --out-gt " + gt +
                " --out-dets " + dets + " --out-embs " + embs) == 0);
    REQUIRE(run("track --dets " + dets + " --embs " + embs + " --out " + hyp) == 0);

    const std::string report =
        run_capture("eval --gt " + gt + " --result " + hyp, dir.file("report.txt"));
    CHECK(report.find("MOTA") != std::string::npos);
    CHECK(report.find("IDF1") != std::string::npos);
    CHECK(report.find("1.000") != std::string::npos);

    // header follows the fixed column order
    const std::size_t pos_mota = report.find("MOTA");
    const std::size_t pos_idf1 = report.find("IDF1");
    const std::size_t pos_mt = report.find("MT");
    const std::size_t pos_ml = report.find("ML");
    const std::size_t pos_ids = report.find("IDs");
    const std::size_t pos_fp = report.find("FP");
    const std::size_t pos_fn = report.find("FN");
    CHECK(pos_mota < pos_idf1);
    CHECK(pos_idf1 < pos_mt);
    CHECK(pos_mt < pos_ml);
    CHECK(pos_ml < pos_ids);
    CHECK(pos_ids < pos_fp);
    CHECK(pos_fp < pos_fn);

    // csv report
    REQUIRE(run("eval --gt " + gt + " --result " + hyp + " --csv " + dir.file("r.csv")) == 0);
    const std::string csv = slurp(dir.file("r.csv"));
    CHECK(csv.rfind("MOTA,IDF1,MT,ML,IDs,FP,FN", 0) == 0);
}

TEST_CASE("track runs motion-only without an embedding file") {
    TempDir dir;
    const std::string dets = dir.file("dets.txt");
    REQUIRE(run("simulate --frames 20 --targets 3 --embed-dim 8 --seed 3 --out-dets " + dets) ==
            0);
    CHECK(run("track --dets " + dets + " --out " + dir.file("h.txt") + " --motion-only") == 0);
    // without --motion-only the embedding sidecar is mandatory
    CHECK(run("track --dets " + dets + " --out " + dir.file("h2.txt")) == 2);
}

TEST_CASE("usage and format errors exit with code 2") {
    TempDir dir;
    CHECK(run("track --dets /nonexistent --out x.txt --motion-only") == 2);
    CHECK(run("definitely-not-a-command") == 2);
    CHECK(run("track") == 2);

    // malformed detection row
    std::ofstream bad(dir.file("bad.txt"));
    bad << "1,-1,10,10,5\n";
    bad.close();
    CHECK(run("track --dets " + dir.file("bad.txt") + " --out " + dir.file("o.txt") +
              " --motion-only") == 2);

    // detection/embedding count mismatch
    const std::string dets = dir.file("dets.txt");
    const std::string embs = dir.file("embs.jdeb");
    REQUIRE(run("simulate --frames 10 --targets 2 --embed-dim 8 --seed 4 --out-dets " + dets +
                " --out-embs " + embs) == 0);
    std::ofstream append(dets, std::ios::app);
    append << "11,-1,5,5,10,30,0.9,-1,-1,-1\n";
    append.close();
    CHECK(run("track --dets " + dets + " --embs " + embs + " --out " + dir.file("o.txt")) == 2);
}

TEST_CASE("config file values apply and flags override them") {
    TempDir dir;
    const std::string dets = dir.file("dets.txt");
    const std::string embs = dir.file("embs.jdeb");
    REQUIRE(run("simulate --frames 12 --targets 2 --embed-dim 8 --seed 5 --out-dets " + dets +
                " --out-embs " + embs) == 0);

    std::ofstream cfg(dir.file("cfg.ini"));
    cfg << "min-conf=0.99\nlambda=0.5\n";
    cfg.close();

    // min-conf 0.99 from the config drops the u(0.8,1.0) confidences often
    // enough to change output vs the default run
    REQUIRE(run("track --dets " + dets + " --embs " + embs + " --out " + dir.file("a.txt") +
                " --config " + dir.file("cfg.ini")) == 0);
    REQUIRE(run("track --dets " + dets + " --embs " + embs + " --out " + dir.file("b.txt")) ==
            0);
    CHECK(slurp(dir.file("a.txt")) != slurp(dir.file("b.txt")));

    // flag overrides the config value, restoring the default behavior
    REQUIRE(run("track --dets " + dets + " --embs " + embs + " --out " + dir.file("c.txt") +
                " --config " + dir.file("cfg.ini") + " --min-conf 0.5 --lambda 0.9") == 0);
    CHECK(slurp(dir.file("c.txt")) == slurp(dir.file("b.txt")));
}

TEST_CASE("track output is deterministic") {
    TempDir dir;
    const std::string dets = dir.file("dets.txt");
    const std::string embs = dir.file("embs.jdeb");
    REQUIRE(run("simulate --frames 25 --targets 5 --p-miss 0.1 --jitter 1 --embed-dim 16"
                " --embed-noise 0.1 --seed 21 --out-dets " +
                dets + " --out-embs " + embs) == 0);
    REQUIRE(run("track --dets " + dets + " --embs " + embs + " --out " + dir.file("a.txt")) ==
            0);
    REQUIRE(run("track --dets " + dets + " --embs " + embs + " --out " + dir.file("b.txt")) ==
            0);
    CHECK(slurp(dir.file("a.txt")) == slurp(dir.file("b.txt")));
    CHECK(!slurp(dir.file("a.txt")).empty());
}

TEST_CASE("simulate is reproducible per seed") {
    TempDir dir;
    for (const char* name : {"x", "y"}) {
        REQUIRE(run(std::string("simulate --frames 15 --targets 3 --p-miss 0.2 --fp-rate 1"
                                " --jitter 1.5 --embed-dim 8 --embed-noise 0.1 --seed 42"
                                " --out-gt ") +
                    dir.file(std::string("gt_") + name) + " --out-dets " +
                    dir.file(std::string("d_") + name) + " --out-embs " +
                    dir.file(std::string("e_") + name)) == 0);
    }
    CHECK(slurp(dir.file("gt_x")) == slurp(dir.file("gt_y")));
    CHECK(slurp(dir.file("d_x")) == slurp(dir.file("d_y")));
    CHECK(slurp(dir.file("e_x")) == slurp(dir.file("e_y")));
}

TEST_CASE("bench and losses-check run and report") {
    TempDir dir;
    const std::string bench = run_capture(
        "bench --densities 5,10 --frames 40 --embed-dim 16 --seed 2", dir.file("bench.txt"));
    CHECK(bench.find("steps/s") != std::string::npos);
    CHECK(bench.find("predict%") != std::string::npos);
    CHECK(bench.find("assign%") != std::string::npos);

    const std::string losses = run_capture("losses-check --trials 500 --grad-trials 10",
                                           dir.file("losses.txt"));
    CHECK(losses.find("losses-check: PASS") != std::string::npos);
}

TEST_CASE("eval warns and evaluates the frame-range intersection") {
    TempDir dir;
    const std::string gt = dir.file("gt.txt");
    const std::string dets = dir.file("dets.txt");
    const std::string embs = dir.file("embs.jdeb");
    REQUIRE(run("simulate --frames 30 --targets 3 --embed-dim 8 --seed 8 --out-gt " + gt +
                " --out-dets " + dets + " --out-embs " + embs) == 0);
    REQUIRE(run("track --dets " + dets + " --embs " + embs + " --out " + dir.file("h.txt")) ==
            0);

    // truncate the hypothesis to frames 1..20
    std::ifstream in(dir.file("h.txt"));
    std::ofstream out(dir.file("h_short.txt"));
    std::string line;
    while (std::getline(in, line)) {
        const int frame = std::stoi(line.substr(0, line.find(',')));
        if (frame <= 20) out << line << "\n";
    }
    in.close();
    out.close();

    const std::string report = run_capture(
        "eval --gt " + gt + " --result " + dir.file("h_short.txt"), dir.file("rep.txt"));
    CHECK(report.find("1.000") != std::string::npos);  // perfect on the intersection
}
