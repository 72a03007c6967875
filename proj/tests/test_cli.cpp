// Spawns the installed command-line binary and checks its observable
// behavior: exit codes, output files, determinism. The binary path arrives
// as a positional argument from ctest (or FUZZYATTN_CLI).

#define DOCTEST_CONFIG_IMPLEMENT
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_dir;

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open ", path.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  return lines;
}

std::string corpus() {
  static std::string path;
  if (path.empty()) {
    path = (g_dir / "toy.ftrial").string();
    REQUIRE(run_cli("synth --dyads 2 --per-condition 5 --seed 3 --window 2 "
                    "-o " + path) == 0);
  }
  return path;
}

const std::string kTinyTrain =
    " --depth 1 --d-model 8 --ffn 16 --rules 3 --epochs 4 --warmup 1 "
    "--batch 4 --seed 5";

}  // namespace

TEST_CASE("synth writes deterministic corpora and validates flags") {
  const std::string a = (g_dir / "det_a.ftrial").string();
  const std::string b = (g_dir / "det_b.ftrial").string();
  CHECK(run_cli("synth --dyads 2 --per-condition 3 --seed 9 --window 2 -o " + a) == 0);
  CHECK(run_cli("synth --dyads 2 --per-condition 3 --seed 9 --window 2 -o " + b) == 0);
  CHECK(slurp(a) == slurp(b));

  CHECK(run_cli("synth --dyads 2 --per-condition 0 --seed 9 -o " +
                (g_dir / "zero.ftrial").string()) == 2);
  CHECK(run_cli("synth --dyads 2 --per-condition 3") == 2);  // missing -o
}

TEST_CASE("train emits checkpoint, history and manifest, bit-reproducibly") {
  const std::string run_a = (g_dir / "run_a").string();
  const std::string run_b = (g_dir / "run_b").string();
  REQUIRE(run_cli("train --data " + corpus() + kTinyTrain + " -o " + run_a) == 0);
  REQUIRE(run_cli("train --data " + corpus() + kTinyTrain + " -o " + run_b) == 0);

  CHECK(slurp(fs::path(run_a) / "checkpoint.fckpt") ==
        slurp(fs::path(run_b) / "checkpoint.fckpt"));
  CHECK(slurp(fs::path(run_a) / "history.jsonl") ==
        slurp(fs::path(run_b) / "history.jsonl"));

  // history: header line plus one record per epoch
  const std::string history = slurp(fs::path(run_a) / "history.jsonl");
  CHECK(count_lines(history) == 5);
  std::istringstream lines(history);
  std::string line;
  std::getline(lines, line);
  CHECK(nlohmann::json::parse(line).at("format") == "history");
  std::getline(lines, line);
  const nlohmann::json record = nlohmann::json::parse(line);
  CHECK(record.contains("lr"));
  CHECK(record.at("val").contains("pr_auc"));

  const nlohmann::json manifest =
      nlohmann::json::parse(slurp(fs::path(run_a) / "run_manifest.json"));
  CHECK(manifest.at("seed") == 5);
  CHECK(manifest.at("split").at("train").size() == 14);
  CHECK(manifest.at("split").at("val").size() == 3);
  CHECK(manifest.at("split").at("test").size() == 3);
}

TEST_CASE("train rejects bad configuration") {
  CHECK(run_cli("train --data " + corpus() +
                " --attn fuzzy,dot --depth 1 --epochs 2 --warmup 0") == 2);
  CHECK(run_cli("train --data " + (g_dir / "absent.ftrial").string() +
                kTinyTrain) == 2);
}

TEST_CASE("eval exports metrics and one prediction per trial") {
  const std::string run_dir = (g_dir / "run_eval").string();
  REQUIRE(run_cli("train --data " + corpus() + kTinyTrain + " -o " + run_dir) == 0);
  const std::string ckpt = (fs::path(run_dir) / "checkpoint.fckpt").string();
  const std::string out = (g_dir / "eval_out").string();
  REQUIRE(run_cli("eval --data " + corpus() + " --checkpoint " + ckpt +
                  " -o " + out) == 0);

  const nlohmann::json report = nlohmann::json::parse(slurp(fs::path(out) / "eval.json"));
  CHECK(report.at("n") == 20);
  CHECK(report.at("metrics").contains("pr_auc"));

  const std::string preds = slurp(fs::path(out) / "predictions.jsonl");
  CHECK(count_lines(preds) == 21);  // header + 20 trials

  // grouped accuracy is recomputable from the export alone
  std::istringstream lines(preds);
  std::string line;
  std::getline(lines, line);  // header
  int by_image[2][2] = {{0, 0}, {0, 0}};  // [negative/neutral][correct]
  while (std::getline(lines, line)) {
    const nlohmann::json rec = nlohmann::json::parse(line);
    const int img = rec.at("image_type") == "negative" ? 0 : 1;
    by_image[img][rec.at("correct").get<bool>() ? 1 : 0] += 1;
  }
  // 5 per condition alternate negative/neutral: 3+2 per (dyad, condition)
  CHECK(by_image[0][0] + by_image[0][1] == 12);
  CHECK(by_image[1][0] + by_image[1][1] == 8);

  // same data, incompatible geometry
  const std::string other = (g_dir / "other.ftrial").string();
  REQUIRE(run_cli("synth --dyads 2 --per-condition 3 --seed 4 --window 3 -o " + other) == 0);
  CHECK(run_cli("eval --data " + other + " --checkpoint " + ckpt + " -o " + out) == 2);
}

TEST_CASE("explain writes a full report and validates the sample index") {
  const std::string run_dir = (g_dir / "run_explain").string();
  REQUIRE(run_cli("train --data " + corpus() + kTinyTrain + " -o " + run_dir) == 0);
  const std::string ckpt = (fs::path(run_dir) / "checkpoint.fckpt").string();
  const std::string report_path = (g_dir / "explanation.json").string();
  REQUIRE(run_cli("explain --data " + corpus() + " --checkpoint " + ckpt +
                  " --sample 1 -o " + report_path) == 0);

  const nlohmann::json report = nlohmann::json::parse(slurp(report_path));
  CHECK(report.at("sample").at("rules").size() == 3);
  CHECK(report.at("group_t_map").at("t").size() == 3);       // rules
  CHECK(report.at("group_t_map").at("t")[0].size() == 16);   // tokens (2 s window)
  CHECK(report.at("prototypes").size() == 3);
  CHECK(report.at("prototypes")[0].at("raw_input").size() == 40);
  CHECK(report.at("ibs").contains("pearson"));

  CHECK(run_cli("explain --data " + corpus() + " --checkpoint " + ckpt +
                " --sample 99 -o " + report_path) == 2);
}

TEST_CASE("ablation grids emit one row per cell") {
  const std::string out = (g_dir / "ablate_out").string();
  const std::string tiny = " --d-model 8 --ffn 16 --rules 2 --epochs 2 --warmup 0 "
                           "--batch 8 --seed 6 --data " + corpus();

  REQUIRE(run_cli("ablate --grid replace --depth 2" + tiny + " -o " + out) == 0);
  std::string csv = slurp(fs::path(out) / "sweep.csv");
  CHECK(count_lines(csv) == 2 + 3);  // comment + header + 2^2-1 cells

  REQUIRE(run_cli("ablate --grid rules --values 2,3" + tiny + " -o " + out) == 0);
  csv = slurp(fs::path(out) / "sweep.csv");
  CHECK(count_lines(csv) == 2 + 2);

  REQUIRE(run_cli("ablate --grid depth --values 1,2" + tiny + " -o " + out) == 0);
  csv = slurp(fs::path(out) / "sweep.csv");
  CHECK(count_lines(csv) == 2 + 2);
  CHECK(csv.find("grid,cell,accuracy,recall,precision,f1,roc_auc,pr_auc") !=
        std::string::npos);

  CHECK(run_cli("ablate --grid rules" + tiny + " -o " + out) == 2);   // no values
  CHECK(run_cli("ablate --grid bogus" + tiny + " -o " + out) == 2);
}

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (!arg.empty() && arg[0] != '-') g_cli = arg;
  }
  if (const char* env = std::getenv("FUZZYATTN_CLI"); env && g_cli.empty()) g_cli = env;
  if (g_cli.empty() || !fs::exists(g_cli)) {
    std::fprintf(stderr, "usage: cli_tests <path-to-cli-binary>\n");
    return 1;
  }
  g_dir = fs::temp_directory_path() / "fuzzyattn_cli_tests";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);

  doctest::Context context;
  context.applyCommandLine(1, argv);
  const int rc = context.run();
  fs::remove_all(g_dir);
  return rc;
}
