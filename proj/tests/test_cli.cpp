#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <string>
#include <vector>

#include "svt/cli.hpp"
#include "svt/common.hpp"
#include "svt/evalkit.hpp"

using namespace svt;
namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"svt"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

struct Workspace {
    fs::path root;
    explicit Workspace(const std::string& tag) {
        root = fs::temp_directory_path() / ("svt_cli_" + tag);
        fs::remove_all(root);
        fs::create_directories(root);
    }
    std::string path(const std::string& rel) const { return (root / rel).string(); }
};

void make_dataset(const Workspace& ws, int count = 3, const std::string& name = "data") {
    REQUIRE(run({"gen", "--out", ws.path(name), "--count", std::to_string(count), "--seed", "7",
                 "--width", "64", "--height", "64", "--min-frames", "10", "--max-frames", "12"}) == 0);
}

}  // namespace

TEST_CASE("gen writes the manifest and reruns reproduce the digest") {
    Workspace ws("gen");
    make_dataset(ws, 5);
    auto manifest = load_manifest(ws.path("data"));
    CHECK(manifest.entries.size() == 5);
    std::string digest = dataset_digest(ws.path("data"));
    make_dataset(ws, 5);
    CHECK(dataset_digest(ws.path("data")) == digest);
}

TEST_CASE("usage errors exit with 2") {
    Workspace ws("usage");
    CHECK(run({"gen", "--count", "3"}) == 2);                       // missing --out
    CHECK(run({"bogus"}) == 2);                                     // unknown subcommand
    CHECK(run({"track", "--mode", "teleport"}) == 2);               // invalid enum
    CHECK(run({}) == 2);                                            // no subcommand
    write_text_file(ws.path("bad.cfg"), "unknown_key=1\n");
    make_dataset(ws, 1);
    CHECK(run({"gen", "--out", ws.path("d2"), "--count", "1", "--config", ws.path("bad.cfg")}) == 2);
}

TEST_CASE("demos: positivity index matches recomputation from the saved boxes") {
    Workspace ws("demos");
    make_dataset(ws);

    SUBCASE("noiseless oracle is fully positive") {
        REQUIRE(run({"demos", "--dataset", ws.path("data"), "--out", ws.path("demos"), "--expert",
                     "oracle", "--eta", "0"}) == 0);
        auto index = split(read_text_file(ws.path("demos/positive.txt")), '\n');
        index.pop_back();  // trailing newline
        CHECK(index.size() == 3);
    }
    SUBCASE("hopeless oracle is fully negative") {
        REQUIRE(run({"demos", "--dataset", ws.path("data"), "--out", ws.path("demos"), "--expert",
                     "oracle", "--eta", "0.9", "--expert-seed", "3"}) == 0);
        std::string index = read_text_file(ws.path("demos/positive.txt"));
        CHECK(index.empty());
    }
    SUBCASE("stored flags equal recomputation from boxes against ground truth") {
        REQUIRE(run({"demos", "--dataset", ws.path("data"), "--out", ws.path("demos"), "--expert",
                     "oracle", "--eta", "0.28", "--expert-seed", "11"}) == 0);
        for (const auto& entry : load_manifest(ws.path("data")).entries) {
            SyntheticSequence seq = load_sequence(ws.path("data/" + entry.id));
            Demonstration d = load_demo(ws.path("demos/" + entry.id + ".txt"));
            bool positive = true;
            for (int t = 1; t < seq.length(); ++t)
                if (!(iou(d.boxes[t], seq.groundtruth[t]) > 0.5)) positive = false;
            CHECK(d.positive == positive);
        }
    }
}

TEST_CASE("the full pipeline runs end to end") {
    Workspace ws("pipeline");
    make_dataset(ws);
    REQUIRE(run({"demos", "--dataset", ws.path("data"), "--out", ws.path("demos"), "--expert",
                 "oracle", "--eta", "0"}) == 0);
    REQUIRE(run({"train", "--dataset", ws.path("data"), "--demos", ws.path("demos"), "--out",
                 ws.path("net.ckpt"), "--episodes", "6", "--workers", "2", "--deterministic",
                 "--seed", "3", "--patch", "8"}) == 0);
    CHECK(fs::exists(ws.path("net.ckpt")));
    CHECK(fs::exists(ws.path("net.ckpt.log")));

    REQUIRE(run({"track", "--checkpoint", ws.path("net.ckpt"), "--dataset", ws.path("data"),
                 "--out", ws.path("traj"), "--mode", "a3ct"}) == 0);
    for (const auto& entry : load_manifest(ws.path("data")).entries) {
        std::string text = read_text_file(ws.path("traj/" + entry.id + ".txt"));
        int lines = 0;
        for (char c : text)
            if (c == '\n') ++lines;
        CHECK(lines == entry.length + 5);  // 5 header lines + one line per frame
    }

    REQUIRE(run({"eval", "--dataset", ws.path("data"), "--checkpoint", ws.path("net.ckpt"),
                 "--mode", "a3ct", "--out", ws.path("report.txt")}) == 0);
    EvalReport report = load_report(ws.path("report.txt"));
    CHECK(report.aggregate.ao >= 0.0);
    CHECK(report.aggregate.ao <= 1.0);

    REQUIRE(run({"eval", "--dataset", ws.path("data"), "--trajectories", ws.path("traj"), "--out",
                 ws.path("report2.txt")}) == 0);
    EvalReport scored = load_report(ws.path("report2.txt"));
    CHECK(scored.aggregate.ao == doctest::Approx(report.aggregate.ao).epsilon(1e-12));

    REQUIRE(run({"plot", "--report", ws.path("report.txt"), "--report", ws.path("report2.txt"),
                 "--out", ws.path("plots")}) == 0);
    CHECK(fs::exists(ws.path("plots/success.svg")));
    CHECK(fs::exists(ws.path("plots/precision.svg")));

    SUBCASE("a3ctd on this checkpoint works and logs sources") {
        REQUIRE(run({"track", "--checkpoint", ws.path("net.ckpt"), "--dataset", ws.path("data"),
                     "--out", ws.path("traj_d"), "--mode", "a3ctd", "--expert", "oracle", "--eta",
                     "0"}) == 0);
        auto entry = load_manifest(ws.path("data")).entries[0];
        TrajectoryRecord rec = load_trajectory(ws.path("traj_d/" + entry.id + ".txt"));
        CHECK(rec.mode == "a3ctd");
        CHECK(rec.source.size() == size_t(entry.length - 1));
    }
}

TEST_CASE("a3ctd tracking refuses an imitation-only checkpoint") {
    Workspace ws("imitonly");
    make_dataset(ws, 2);
    REQUIRE(run({"demos", "--dataset", ws.path("data"), "--out", ws.path("demos"), "--expert",
                 "oracle", "--eta", "0"}) == 0);
    REQUIRE(run({"train", "--dataset", ws.path("data"), "--demos", ws.path("demos"), "--out",
                 ws.path("sl.ckpt"), "--episodes", "4", "--workers", "2", "--deterministic",
                 "--imitation-only", "--patch", "8"}) == 0);
    CHECK(run({"track", "--checkpoint", ws.path("sl.ckpt"), "--dataset", ws.path("data"), "--out",
               ws.path("traj"), "--mode", "a3ctd", "--expert", "oracle"}) == 1);
}

TEST_CASE("training on an empty demonstration pool is a runtime error") {
    Workspace ws("emptypool");
    make_dataset(ws, 2);
    fs::create_directories(ws.path("demos"));
    CHECK(run({"train", "--dataset", ws.path("data"), "--demos", ws.path("demos"), "--out",
               ws.path("x.ckpt"), "--episodes", "4", "--workers", "2", "--patch", "8"}) == 1);
}

TEST_CASE("eval flags mismatched trajectory digests with exit 3") {
    Workspace ws("mismatch");
    make_dataset(ws, 2);
    REQUIRE(run({"demos", "--dataset", ws.path("data"), "--out", ws.path("demos"), "--expert",
                 "oracle", "--eta", "0"}) == 0);
    REQUIRE(run({"train", "--dataset", ws.path("data"), "--demos", ws.path("demos"), "--out",
                 ws.path("net.ckpt"), "--episodes", "4", "--workers", "2", "--deterministic",
                 "--patch", "8"}) == 0);
    REQUIRE(run({"track", "--checkpoint", ws.path("net.ckpt"), "--dataset", ws.path("data"),
                 "--out", ws.path("traj"), "--mode", "a3ct"}) == 0);
    // regenerate with a different noise level: same lengths, new digest
    REQUIRE(run({"gen", "--out", ws.path("data"), "--count", "2", "--seed", "7", "--width", "64",
                 "--height", "64", "--min-frames", "10", "--max-frames", "12", "--noise-amp",
                 "5"}) == 0);
    CHECK(run({"eval", "--dataset", ws.path("data"), "--trajectories", ws.path("traj"), "--out",
               ws.path("r.txt")}) == 3);
    CHECK(fs::exists(ws.path("r.txt")));  // the report is still written
}

TEST_CASE("gradcheck subcommand passes") {
    CHECK(run({"gradcheck", "--seed", "5"}) == 0);
}

TEST_CASE("config file keys are honored and flags win") {
    Workspace ws("config");
    make_dataset(ws, 2);
    REQUIRE(run({"demos", "--dataset", ws.path("data"), "--out", ws.path("demos"), "--expert",
                 "oracle", "--eta", "0"}) == 0);
    write_text_file(ws.path("train.cfg"),
                    "# tiny run\nepisodes=4\nworkers=2\ndeterministic=1\npatch=8\nseed=9\n");
    REQUIRE(run({"train", "--dataset", ws.path("data"), "--demos", ws.path("demos"), "--out",
                 ws.path("a.ckpt"), "--config", ws.path("train.cfg")}) == 0);
    // a flag overrides the config file value
    REQUIRE(run({"train", "--dataset", ws.path("data"), "--demos", ws.path("demos"), "--out",
                 ws.path("b.ckpt"), "--config", ws.path("train.cfg"), "--seed", "10"}) == 0);
    auto a = load_checkpoint(ws.path("a.ckpt"));
    auto b = load_checkpoint(ws.path("b.ckpt"));
    CHECK(a.meta.train_seed == 9);
    CHECK(b.meta.train_seed == 10);
    write_text_file(ws.path("bad.cfg"), "weird=1\n");
    CHECK(run({"train", "--dataset", ws.path("data"), "--demos", ws.path("demos"), "--out",
               ws.path("c.ckpt"), "--config", ws.path("bad.cfg")}) == 2);
}
