#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "hsad/ensemble.hpp"
#include "hsad/envi.hpp"
#include "hsad/scoremap_io.hpp"
#include "test_util.hpp"

namespace {

std::string cli_path() {
    const char* env = std::getenv("HSAD_CLI");
    REQUIRE_MESSAGE(env != nullptr, "HSAD_CLI must point at the hsad binary");
    return env;
}

int run(const std::string& args, const std::string& log = "/dev/null") {
    std::string cmd = cli_path() + " " + args + " > " + log + " 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("synth / detect / evaluate happy path") {
    testutil::TempDir dir("cli_happy");
    CHECK(run("synth --out " + dir.file("s.hdr") + " --mask-out " + dir.file("m.hdr") +
              " --width 20 --height 20 --bands 12 --anomaly-count 3 --anomaly-size 2"
              " --contrast 0.8 --seed 5") == 0);
    CHECK(run("detect --input " + dir.file("s.hdr") + " --detector rx --output " +
              dir.file("rx.f64")) == 0);

    std::string report = dir.file("report.txt");
    CHECK(run("evaluate --scores " + dir.file("rx.f64") + " --truth " + dir.file("m.hdr") +
              " --out " + report + " --csv " + dir.file("report.csv")) == 0);
    std::string text = slurp(report);
    CHECK(text.find("auc = ") != std::string::npos);
    CHECK(slurp(dir.file("report.csv")).find("scene,dataset,auc") != std::string::npos);
}

TEST_CASE("perfect scores evaluate to auc 1.000000") {
    testutil::TempDir dir("cli_perfect");
    REQUIRE(run("synth --out " + dir.file("s.hdr") + " --mask-out " + dir.file("m.hdr") +
                " --width 12 --height 12 --bands 8 --anomaly-count 2 --anomaly-size 1"
                " --contrast 0.5 --seed 9") == 0);
    // build a perfect score map from the mask itself
    hsad::TruthMask mask = hsad::load_mask(dir.file("m.hdr"));
    hsad::ScoreMap perfect;
    perfect.width = mask.width;
    perfect.height = mask.height;
    for (uint8_t v : mask.labels) perfect.scores.push_back(v ? 1.0 : 0.0);
    hsad::save_scoremap(perfect, dir.file("p.f64"), hsad::ScoreMapFormat::FlatF64);

    std::string log = dir.file("out.log");
    CHECK(run("evaluate --scores " + dir.file("p.f64") + " --truth " + dir.file("m.hdr"),
              log) == 0);
    CHECK(slurp(log).find("auc = 1.000000") != std::string::npos);
}

TEST_CASE("usage errors exit 2 with helpful messages") {
    testutil::TempDir dir("cli_usage");
    REQUIRE(run("synth --out " + dir.file("s.hdr") + " --mask-out " + dir.file("m.hdr") +
                " --width 12 --height 12 --bands 6 --anomaly-count 2 --anomaly-size 1") == 0);

    std::string log = dir.file("err.log");
    CHECK(run("detect --input " + dir.file("s.hdr") +
              " --detector bogus --output " + dir.file("x.f64"), log) == 2);
    CHECK(slurp(log).find("lsunrsorad") != std::string::npos); // lists valid ids

    CHECK(run("detect --input " + dir.file("s.hdr") +
              " --detector win_rx --window 4 --output " + dir.file("x.f64"), log) == 2);
    CHECK(slurp(log).find("odd") != std::string::npos);

    CHECK(run("frobnicate") == 2); // unknown subcommand
}

TEST_CASE("data errors exit 3") {
    testutil::TempDir dir("cli_data");
    CHECK(run("detect --input " + dir.file("missing.hdr") + " --detector rx --output " +
              dir.file("x.f64")) == 3);
}

TEST_CASE("fuse average matches the library bit for bit") {
    testutil::TempDir dir("cli_fuse");
    REQUIRE(run("synth --out " + dir.file("s.hdr") + " --mask-out " + dir.file("m.hdr") +
                " --width 16 --height 16 --bands 10 --anomaly-count 2 --anomaly-size 2"
                " --contrast 0.7 --seed 3") == 0);
    for (const char* det : {"rx", "ssrx", "csd"})
        REQUIRE(run(std::string("detect --input ") + dir.file("s.hdr") + " --detector " +
                    det + " --output " + dir.file(std::string(det) + ".f64")) == 0);

    CHECK(run("fuse --inputs " + dir.file("rx.f64") + " " + dir.file("ssrx.f64") + " " +
              dir.file("csd.f64") + " --mode average --output " + dir.file("avg.f64")) == 0);

    std::vector<hsad::ScoreMap> maps = {hsad::load_scoremap_flat(dir.file("rx.f64")),
                                        hsad::load_scoremap_flat(dir.file("ssrx.f64")),
                                        hsad::load_scoremap_flat(dir.file("csd.f64"))};
    hsad::ScoreMap expected = hsad::average_fuse(maps);
    hsad::ScoreMap actual = hsad::load_scoremap_flat(dir.file("avg.f64"));
    CHECK(actual.scores == expected.scores);
}

TEST_CASE("stack train/apply round trip on a manifest") {
    testutil::TempDir dir("cli_stack");
    // 20x20 keeps the default kifd landmark count (300) within the pixel
    // budget for the mge default bases
    for (int i = 0; i < 2; ++i) {
        std::string tag = std::to_string(i);
        REQUIRE(run("synth --out " + dir.file("s" + tag + ".hdr") + " --mask-out " +
                    dir.file("m" + tag + ".hdr") +
                    " --width 20 --height 20 --bands 32 --anomaly-count 2"
                    " --anomaly-size 2 --contrast 0.7 --seed " + std::to_string(20 + i)) == 0);
    }
    {
        std::ofstream manifest(dir.file("scenes.txt"));
        manifest << "s0.hdr m0.hdr synth\n";
        manifest << "s1.hdr m1.hdr synth\n";
    }
    CHECK(run("stack-train --scenes " + dir.file("scenes.txt") +
              " --builder uge --bases rx,cbad --out " + dir.file("model.txt")) == 0);
    std::string model_text = slurp(dir.file("model.txt"));
    CHECK(model_text.find("meta_kind = gmm") != std::string::npos);

    CHECK(run("stack-apply --model " + dir.file("model.txt") + " --input " +
              dir.file("s0.hdr") + " --output " + dir.file("uge0.f64")) == 0);
    hsad::ScoreMap map = hsad::load_scoremap_flat(dir.file("uge0.f64"));
    CHECK(map.width == 20);

    // mge default bases match the published search result
    CHECK(run("stack-train --scenes " + dir.file("scenes.txt") +
              " --builder mge --out " + dir.file("mge.txt")) == 0);
    std::string mge_text = slurp(dir.file("mge.txt"));
    CHECK(mge_text.find("id=gm_rx") != std::string::npos);
    CHECK(mge_text.find("id=kifd") != std::string::npos);
    CHECK(mge_text.find("id=lsunrsorad") != std::string::npos);
    CHECK(mge_text.find("id=md_rx") != std::string::npos);
}

TEST_CASE("thread count changes wall time only, never output bytes") {
    testutil::TempDir dir("cli_threads");
    REQUIRE(run("synth --out " + dir.file("s.hdr") + " --mask-out " + dir.file("m.hdr") +
                " --width 18 --height 18 --bands 10 --anomaly-count 2 --anomaly-size 1"
                " --contrast 0.6 --seed 7") == 0);
    // lsunrsorad and win_rx run their pixel loops in parallel
    for (const char* det : {"lsunrsorad", "win_rx"}) {
        std::string extra = std::string(det) == "win_rx" ? " --window 5 --guard 1" : "";
        REQUIRE(run(std::string("detect --input ") + dir.file("s.hdr") + " --detector " +
                    det + extra + " --output " + dir.file("t1.f64") + " --threads 1") == 0);
        REQUIRE(run(std::string("detect --input ") + dir.file("s.hdr") + " --detector " +
                    det + extra + " --output " + dir.file("t2.f64") + " --threads 2") == 0);
        CHECK(slurp(dir.file("t1.f64")) == slurp(dir.file("t2.f64")));
    }
}

TEST_CASE("cv-mode evaluate with a single-detector builder") {
    testutil::TempDir dir("cli_cv");
    for (int i = 0; i < 2; ++i) {
        std::string tag = std::to_string(i);
        REQUIRE(run("synth --out " + dir.file("s" + tag + ".hdr") + " --mask-out " +
                    dir.file("m" + tag + ".hdr") +
                    " --width 14 --height 14 --bands 10 --anomaly-count 2"
                    " --anomaly-size 1 --contrast 0.7 --seed " + std::to_string(40 + i)) == 0);
    }
    {
        std::ofstream manifest(dir.file("scenes.txt"));
        manifest << "s0.hdr m0.hdr synth\ns1.hdr m1.hdr synth\n";
    }
    CHECK(run("evaluate --scenes " + dir.file("scenes.txt") +
              " --builder detector:rx --repeats 2 --out " + dir.file("cv.txt")) == 0);
    std::string text = slurp(dir.file("cv.txt"));
    CHECK(text.find("aggregate {") != std::string::npos);
    CHECK(text.find("repeats = 2") != std::string::npos);
}

TEST_CASE("greedy smoke run selects at least one detector") {
    testutil::TempDir dir("cli_greedy");
    for (int i = 0; i < 4; ++i) {
        std::string tag = std::to_string(i);
        REQUIRE(run("synth --out " + dir.file("s" + tag + ".hdr") + " --mask-out " +
                    dir.file("m" + tag + ".hdr") +
                    " --width 16 --height 16 --bands 12 --anomaly-count 2"
                    " --anomaly-size 2 --contrast 0.8 --seed " + std::to_string(30 + i)) == 0);
    }
    {
        std::ofstream manifest(dir.file("scenes.txt"));
        for (int i = 0; i < 4; ++i)
            manifest << "s" << i << ".hdr m" << i << ".hdr ds" << (i % 2) << "\n";
    }
    std::string log = dir.file("out.log");
    CHECK(run("greedy --scenes " + dir.file("scenes.txt") +
              " --candidates rx,cbad --builder average --repeats 2 --out " +
              dir.file("greedy.txt"), log) == 0);
    CHECK(slurp(log).find("selected: ") != std::string::npos);
    CHECK(slurp(dir.file("greedy.txt")).find("round 1") != std::string::npos);

    // folds exceeding the scene count is a usage error
    CHECK(run("greedy --scenes " + dir.file("scenes.txt") +
              " --candidates rx --builder average --folds 9") == 2);
}

} // TEST_SUITE
