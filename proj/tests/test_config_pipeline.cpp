#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "archemb/benchmark.hpp"
#include "archemb/config.hpp"
#include "archemb/errors.hpp"
#include "archemb/pipeline.hpp"

using namespace archemb;
namespace fs = std::filesystem;

TEST_CASE("default config echoes the documented defaults") {
    const ExperimentConfig cfg;
    const std::string text = resolved_config_text(cfg);
    CHECK(text.find("temperature=0.1\n") != std::string::npos);
    CHECK(text.find("batch_size=512\n") != std::string::npos);
    CHECK(text.find("probe_count=32\n") != std::string::npos);
    CHECK(text.find("k=8\n") != std::string::npos);
    CHECK(text.find("n_views=4\n") != std::string::npos);
    CHECK(text.find("train_epochs=40\n") != std::string::npos);
}

TEST_CASE("config parsing: roundtrip, defaults, comments, rejection") {
    const ExperimentConfig cfg = parse_config_text(
        "# comment line\n"
        "space=size\n"
        "batch_size = 64\n"
        "normalized=true\n"
        "temperature=0.25\n");
    CHECK(cfg.space == "size");
    CHECK(cfg.batch_size == 64);
    CHECK(cfg.normalized);
    CHECK(cfg.temperature == doctest::Approx(0.25));
    CHECK(cfg.k == 8);  // untouched default

    // resolved text parses back to the same configuration
    const ExperimentConfig back = parse_config_text(resolved_config_text(cfg));
    CHECK(resolved_config_text(back) == resolved_config_text(cfg));
    CHECK(config_hash_hex(back) == config_hash_hex(cfg));

    CHECK_THROWS_AS(parse_config_text("unknown_key=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("space=banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("temperature=-1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("batch_size=abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("just a line\n"), ConfigError);
}

TEST_CASE("benchmark files round-trip and keep unique keys") {
    TabularBenchmark bench;
    BenchRecord r1{parse_genotype("T-000000"), 0, {0.3, 0.4}, 0.4};
    BenchRecord r2{parse_genotype("T-000001"), 0, {0.2, 0.5}, 0.5};
    BenchRecord r3{parse_genotype("T-000000"), 1, {0.1, 0.2}, 0.2};
    bench.insert(r1);
    bench.insert(r2);
    bench.insert(r3);
    CHECK(bench.size() == 3);
    bench.insert(r1);  // same key overwrites, no duplicate
    CHECK(bench.size() == 3);

    const fs::path path = fs::temp_directory_path() / "archemb_bench_test.jsonl";
    bench.save(path, "config deadbeef");
    const TabularBenchmark loaded = TabularBenchmark::load(path);
    CHECK(loaded.size() == 3);
    CHECK(loaded.final_accuracy(parse_genotype("T-000001"), 0) == doctest::Approx(0.5));
    CHECK(loaded.at(parse_genotype("T-000000"), 1).curve ==
          std::vector<double>{0.1, 0.2});
    CHECK(loaded.has(parse_genotype("T-000000"), 0));
    CHECK(!loaded.has(parse_genotype("T-222222"), 0));
    CHECK_THROWS_AS(loaded.at(parse_genotype("T-222222"), 0), MissingArtifactError);

    // saving the loaded copy reproduces the file byte-for-byte
    const fs::path copy = fs::temp_directory_path() / "archemb_bench_copy.jsonl";
    loaded.save(copy, "config deadbeef");
    std::ifstream f1(path), f2(copy);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    const std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    fs::remove(path);
    fs::remove(copy);
}

TEST_CASE("missing upstream artifacts are reported with their path") {
    ExperimentConfig cfg;
    cfg.out_dir = (fs::temp_directory_path() / "archemb_missing_test").string();
    fs::remove_all(cfg.out_dir);
    CHECK_THROWS_AS(pipeline::train_encoder_cmd(cfg, 1), MissingArtifactError);
    CHECK_THROWS_AS(pipeline::embed_cmd(cfg, 1), MissingArtifactError);
    CHECK_THROWS_AS(pipeline::report_cmd(cfg, 1), MissingArtifactError);
    try {
        pipeline::search_cmd(cfg, 1);
        CHECK(false);
    } catch (const MissingArtifactError& e) {
        CHECK(std::string(e.what()).find("bench_topology.jsonl") != std::string::npos);
    }
    fs::remove_all(cfg.out_dir);
}

TEST_CASE("transfer rejects configs without a shared normalized union store") {
    ExperimentConfig cfg;
    cfg.out_dir = (fs::temp_directory_path() / "archemb_transfer_cfg").string();
    cfg.space = "topology";
    cfg.normalized = true;
    CHECK_THROWS_AS(pipeline::transfer_cmd(cfg, 1), ConfigError);
    cfg.space = "both";
    cfg.normalized = false;
    CHECK_THROWS_AS(pipeline::transfer_cmd(cfg, 1), ConfigError);
}
