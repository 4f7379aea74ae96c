#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <sys/wait.h>

#include "fedgbdt/commands.hpp"
#include "fedgbdt/federation.hpp"
#include "test_util.hpp"

using namespace fedgbdt;
using namespace fedgbdt::testing;
using nlohmann::json;

namespace {

int run_cli(const std::string& args, const std::string& log_path) {
    const std::string cmd =
        std::string(FEDGBDT_CLI_PATH) + " " + args + " > " + log_path + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// small config so each invocation stays well under a second
std::string tiny_config(std::uint64_t seed, const std::string& out_dir) {
    json cfg = {
        {"dataset",
         {{"synthetic",
           {{"n_samples", 300},
            {"n_features", 3},
            {"n_classes", 3},
            {"cluster_std", 0.6},
            {"center_scale", 3.0}}}}},
        {"n_clients", 3},
        {"partition", "heterogeneous"},
        {"mask_p", 0.05},
        {"label_q", 0.1},
        {"epsilon", 50},
        {"budget", {{"ratio", 1.0}}},
        {"hyper",
         {{"n_estimators", 5},
          {"max_depth", 3},
          {"learning_rate", 0.2},
          {"lambda_l2", 1.0},
          {"min_samples_leaf", 2}}},
        {"test_fraction", 0.3},
        {"master_seed", seed},
        {"out_dir", out_dir}};
    return cfg.dump(2) + "\n";
}

} // namespace

TEST_CASE("simulate produces the full artifact set and exits zero") {
    TempDir tmp;
    write_file(tmp.file("run.json"), tiny_config(1, tmp.file("out")));
    const int code = run_cli("simulate --config " + tmp.file("run.json"), tmp.file("log"));
    CHECK(code == 0);

    const json report = json::parse(read_file(tmp.file("out") + "/report.json"));
    CHECK(report.contains("accuracy"));
    CHECK(report.contains("miss_rate"));
    CHECK(report.contains("f1_attack"));
    CHECK(report.contains("confusion"));

    // resolved config echoed next to the outputs, defaults filled in
    const json echo = json::parse(read_file(tmp.file("out") + "/run_config.json"));
    CHECK(echo["master_seed"] == 1);
    CHECK(echo["hyper"].contains("num_leaves"));

    CHECK_FALSE(read_file(tmp.file("out") + "/model/manifest.json").empty());
    CHECK_FALSE(read_file(tmp.file("out") + "/ledger.json").empty());
    const std::string log = read_file(tmp.file("log"));
    CHECK(log.find("federated accuracy") != std::string::npos);
}

TEST_CASE("rerunning an identical config reproduces every artifact byte") {
    TempDir tmp;
    write_file(tmp.file("a.json"), tiny_config(2, tmp.file("out_a")));
    write_file(tmp.file("b.json"), tiny_config(2, tmp.file("out_b")));
    REQUIRE(run_cli("simulate --config " + tmp.file("a.json"), tmp.file("log_a")) == 0);
    REQUIRE(run_cli("simulate --config " + tmp.file("b.json"), tmp.file("log_b")) == 0);
    for (const std::string name :
         {"report.json", "ledger.json", "model/server_forest.json", "model/manifest.json"}) {
        CHECK(read_file(tmp.file("out_a") + "/" + name) ==
              read_file(tmp.file("out_b") + "/" + name));
    }
}

TEST_CASE("central trains the pooled comparator and prints the gap") {
    TempDir tmp;
    write_file(tmp.file("run.json"), tiny_config(3, tmp.file("out")));
    REQUIRE(run_cli("simulate --config " + tmp.file("run.json"), tmp.file("log1")) == 0);
    const int code = run_cli("central --config " + tmp.file("run.json"), tmp.file("log2"));
    CHECK(code == 0);
    const json report = json::parse(read_file(tmp.file("out") + "/central/report.json"));
    CHECK(report.contains("accuracy"));
    const std::string log = read_file(tmp.file("log2"));
    CHECK(log.find("centralized accuracy") != std::string::npos);
    CHECK(log.find("accuracy gap") != std::string::npos);
}

TEST_CASE("the ledger command reproduces the simulate ledger") {
    TempDir tmp;
    write_file(tmp.file("run.json"), tiny_config(4, tmp.file("out")));
    REQUIRE(run_cli("simulate --config " + tmp.file("run.json"), tmp.file("log1")) == 0);
    REQUIRE(run_cli("ledger --config " + tmp.file("run.json"), tmp.file("log2")) == 0);
    CHECK(read_file(tmp.file("out") + "/ledger.json") ==
          read_file(tmp.file("out") + "/ledger/ledger.json"));
}

TEST_CASE("rules dumps readable conjunctions from a saved model") {
    TempDir tmp;
    write_file(tmp.file("run.json"), tiny_config(5, tmp.file("out")));
    REQUIRE(run_cli("simulate --config " + tmp.file("run.json"), tmp.file("log1")) == 0);
    const int code = run_cli(
        "rules --model " + tmp.file("out") + "/model --out " + tmp.file("rules_out"),
        tmp.file("log2"));
    CHECK(code == 0);
    const std::string rules = read_file(tmp.file("rules_out") + "/rules.txt");
    CHECK(rules.find("=>") != std::string::npos);
}

TEST_CASE("unlearning a non-participant exits with a pipeline error") {
    TempDir tmp;
    write_file(tmp.file("run.json"), tiny_config(6, tmp.file("out")));
    REQUIRE(run_cli("simulate --config " + tmp.file("run.json"), tmp.file("log1")) == 0);
    const int code =
        run_cli("unlearn --model " + tmp.file("out") + "/model --client 99", tmp.file("log2"));
    CHECK(code == kExitPipelineError);
}

TEST_CASE("unlearning a non-encoder participant attests byte equivalence") {
    TempDir tmp;
    write_file(tmp.file("run.json"), tiny_config(7, tmp.file("out")));
    REQUIRE(run_cli("simulate --config " + tmp.file("run.json"), tmp.file("log1")) == 0);

    // find an uploading client whose encoder was not selected
    const RunConfig cfg = load_run_config(tmp.file("run.json"));
    const PreparedRun run = prepare_run(cfg);
    const TrainingArtifacts artifacts = run_training(run.partitions, run.pipeline);
    std::set<int> encoder_ids;
    for (const EncoderRecord& e : artifacts.model.encoders) encoder_ids.insert(e.client_id);
    int victim = -1;
    for (const auto& [id, upload] : artifacts.uploads)
        if (!encoder_ids.count(id)) victim = id;
    REQUIRE(victim >= 0);

    const int code = run_cli("unlearn --model " + tmp.file("out") + "/model --client " +
                                 std::to_string(victim) + " --out " + tmp.file("unlearned"),
                             tmp.file("log2"));
    CHECK(code == 0);
    const json attest = json::parse(read_file(tmp.file("unlearned") + "/attestation.json"));
    CHECK(attest["client_id"] == victim);
    CHECK(attest["was_encoder"] == false);
    CHECK(attest["fresh_run_identical"] == true);
    CHECK(attest["equivalence_guaranteed"] == true);
}

TEST_CASE("config problems exit with the config status") {
    TempDir tmp;
    write_file(tmp.file("broken.json"), "{ not json");
    CHECK(run_cli("simulate --config " + tmp.file("broken.json"), tmp.file("log1")) ==
          kExitConfigError);

    write_file(tmp.file("badfield.json"),
               R"({"dataset": {"synthetic": {"n_samples": 100}}, "epsilon": "banana"})");
    CHECK(run_cli("simulate --config " + tmp.file("badfield.json"), tmp.file("log2")) ==
          kExitConfigError);

    CHECK(run_cli("simulate --config " + tmp.file("missing.json"), tmp.file("log3")) ==
          kExitConfigError);

    // the diagnostic names the offending field
    const std::string log = read_file(tmp.file("log2"));
    CHECK(log.find("epsilon") != std::string::npos);
}

TEST_CASE("a bad budget ratio is rejected at load time") {
    TempDir tmp;
    json cfg = json::parse(tiny_config(8, tmp.file("out")));
    cfg["budget"] = {{"ratio", 0.0}};
    write_file(tmp.file("run.json"), cfg.dump());
    CHECK(run_cli("simulate --config " + tmp.file("run.json"), tmp.file("log")) ==
          kExitConfigError);
}

TEST_CASE("the seed flag overrides the config seed in the echo") {
    TempDir tmp;
    write_file(tmp.file("run.json"), tiny_config(9, tmp.file("out")));
    REQUIRE(run_cli("simulate --config " + tmp.file("run.json") + " --seed 77 --out " +
                        tmp.file("out2"),
                    tmp.file("log")) == 0);
    const json echo = json::parse(read_file(tmp.file("out2") + "/run_config.json"));
    CHECK(echo["master_seed"] == 77);
}
