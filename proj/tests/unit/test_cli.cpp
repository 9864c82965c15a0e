#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "json.hpp"
#include "sinit/cli/config.hpp"
#include "sinit/cli/experiments.hpp"
#include "sinit/cli/io.hpp"
#include "sinit/error.hpp"

using namespace sinit;
using namespace sinit::cli;
namespace fs = std::filesystem;

namespace {

template <typename F>
Errc error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected sinit::Error");
  return Errc::io;
}

fs::path scratch(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("sinit-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Exit {
  int code;
  std::string err;
};

Exit sinit_cli(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + SINIT_EXE + "\" " + args + " > \"" +
                          (dir / "stdout.txt").string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

double number(const std::string& cell) { return std::stod(cell); }

}  // namespace

TEST_CASE("config text parsing") {
  const Config c = Config::parse("# header\n m = 8 \n\nn=64 # trailing\nname = a, b ,c\n");
  CHECK(c.count("m") == 8);
  CHECK(c.count("n") == 64);
  CHECK(c.list("name") == std::vector<std::string>{"a", "b", "c"});
  CHECK(c.entries().size() == 3);

  CHECK(error_code([] { (void)Config::parse("a = 1\na = 2\n"); }) == Errc::config);
  CHECK(error_code([] { (void)Config::parse("just words\n"); }) == Errc::config);
  CHECK(error_code([] { (void)Config::parse(" = 4\n"); }) == Errc::config);

  const Config t = Config::parse("x = -3\ny = 1e-3\nz = nan\nw = 12abc\nl = 1,2,3\n");
  CHECK(error_code([&] { (void)t.count("x"); }) == Errc::config);
  CHECK(t.real("y") == 1e-3);
  CHECK(error_code([&] { (void)t.real("z"); }) == Errc::config);
  CHECK(error_code([&] { (void)t.count("w"); }) == Errc::config);
  CHECK(t.count_list("l") == std::vector<std::size_t>{1, 2, 3});
  CHECK(error_code([&] { (void)t.text("missing"); }) == Errc::config);
}

TEST_CASE("resolve_config layering") {
  const fs::path dir = scratch("resolve");
  const fs::path file = dir / "run.cfg";
  write_text(file, "m = 16\nn = 32\noutput_dir = from-file\n");

  const ExperimentConfig defaults = resolve_config("init-dump", std::nullopt, {});
  CHECK(defaults.values.count("m") == 8);
  CHECK(defaults.values.text("scheme") == "sinusoidal");
  CHECK(defaults.seed() == 0);

  const ExperimentConfig layered = resolve_config("init-dump", file, {{"n", "48"}});
  CHECK(layered.values.count("m") == 16);
  CHECK(layered.values.count("n") == 48);

  ::setenv(kOutputRootEnv, "/tmp/root-prefix", 1);
  CHECK(resolve_config("init-dump", file, {}).output_dir == fs::path("/tmp/root-prefix/from-file"));
  CHECK(resolve_config("init-dump", file, {{"output_dir", "/abs"}}).output_dir == fs::path("/abs"));
  ::unsetenv(kOutputRootEnv);
  CHECK(resolve_config("init-dump", file, {}).output_dir == fs::path("from-file"));

  CHECK(error_code([] { (void)resolve_config("init-dump", std::nullopt, {{"bogus", "1"}}); }) ==
        Errc::config);
  CHECK(error_code([] { (void)resolve_config("init-dump", std::nullopt, {{"m", "eight"}}); }) ==
        Errc::config);
  CHECK(error_code([] { (void)resolve_config("skew-table", std::nullopt, {{"alphas", ""}}); }) ==
        Errc::config);
  CHECK(error_code([] { (void)resolve_config("no-such", std::nullopt, {}); }) == Errc::config);
  CHECK(error_code([&] { (void)resolve_config("init-dump", dir / "absent.cfg", {}); }) == Errc::io);

  for (const auto& sub : subcommands()) {
    const Config d = defaults_for(sub);
    CHECK(d.has("seed"));
    CHECK(d.has("output_dir"));
  }
}

TEST_CASE("csv and pgm round trips") {
  const fs::path dir = scratch("io");
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
    CHECK(std::stod(format_real(x)) == x);
  CHECK(format_short(0.3) == "0.3");

  CsvTable t;
  t.header = {"a", "b"};
  t.rows = {{"1", format_real(0.1)}, {"x", ""}};
  write_csv(dir / "sub" / "t.csv", t);
  const CsvTable back = read_csv(dir / "sub" / "t.csv");
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);

  CsvTable ragged;
  ragged.header = {"a", "b"};
  ragged.rows = {{"1"}};
  CHECK(error_code([&] { write_csv(dir / "r.csv", ragged); }) == Errc::shape_mismatch);

  GrayImage img;
  img.height = 3;
  img.width = 4;
  for (int i = 0; i < 12; ++i) img.pixels.push_back(i % 2 ? 255 : 0);
  img.pixels[5] = 10;  // '\n' must survive binary writes
  write_pgm(dir / "i.pgm", img);
  CHECK(slurp(dir / "i.pgm").rfind("P5\n4 3\n255\n", 0) == 0);
  const GrayImage again = read_pgm(dir / "i.pgm");
  CHECK(again.height == 3);
  CHECK(again.width == 4);
  CHECK(again.pixels == img.pixels);
}

TEST_CASE("init-dump through the binary") {
  const fs::path dir = scratch("init-dump");
  const Exit ok = sinit_cli("init-dump --m=8 --n 64 --output_dir=" + (dir / "a").string(), dir);
  REQUIRE(ok.code == 0);
  const auto meta = nlohmann::json::parse(slurp(dir / "a" / "metadata.json"));
  CHECK(std::abs(meta["achieved_variance"].get<double>() - 2.0 / 72.0) <= 1e-12 * 2.0 / 72.0);
  CHECK(meta["scheme"] == "sinusoidal");

  const auto sidecar = nlohmann::json::parse(slurp(dir / "a" / "config.resolved.json"));
  CHECK(sidecar["subcommand"] == "init-dump");
  CHECK(sidecar["config"]["m"] == "8");

  const CsvTable w = read_csv(dir / "a" / "weights.csv");
  CHECK(w.rows.size() == 8);
  CHECK(w.header.size() == 64);

  REQUIRE(sinit_cli("init-dump --m=8 --n=64 --output_dir=" + (dir / "b").string(), dir).code == 0);
  for (const char* f : {"weights.csv", "metadata.json"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));

  const fs::path cfg = dir / "run.cfg";
  write_text(cfg, "scheme = he_normal\nm = 4\nn = 4\nseed = 5\noutput_dir = " +
                      (dir / "c").string() + "\n");
  REQUIRE(sinit_cli("init-dump --config " + cfg.string() + " --m=6", dir).code == 0);
  CHECK(read_csv(dir / "c" / "weights.csv").rows.size() == 6);
  CHECK(nlohmann::json::parse(slurp(dir / "c" / "metadata.json"))["seed"] == 5);

  const Exit bad = sinit_cli("init-dump --scheme=not_a_scheme --output_dir=" + (dir / "d").string(), dir);
  CHECK(bad.code != 0);
  const auto err = nlohmann::json::parse(bad.err);
  CHECK(err["error"] == "config");
  CHECK(err["message"].get<std::string>().find("not_a_scheme") != std::string::npos);

  CHECK(sinit_cli("init-dump --unknown_key=3", dir).code != 0);
  CHECK(sinit_cli("no-such-subcommand", dir).code != 0);
  CHECK(sinit_cli("", dir).code != 0);
}

TEST_CASE("experiment outputs are self-consistent") {
  const fs::path dir = scratch("experiments");
  const std::string mlp = " --input_dim=32 --widths=48,48,48";

  REQUIRE(sinit_cli("skew-table" + mlp + " --mc_samples=2000 --output_dir=" + (dir / "skew").string(), dir).code == 0);
  const CsvTable skew = read_csv(dir / "skew" / "skew_table.csv");
  CHECK(skew.header == std::vector<std::string>{"alpha", "glorot_normal", "he_normal", "orthogonal",
                                                "lsuv", "sinusoidal"});
  CHECK(skew.rows.size() == 2);
  for (const auto& row : skew.rows)
    for (std::size_t c = 1; c < row.size(); ++c) {
      CHECK(number(row[c]) >= 0.0);
      CHECK(number(row[c]) <= 100.0);
    }

  REQUIRE(sinit_cli("activation-map" + mlp + " --samples=40 --sample_limit=30 --neuron_limit=20 --output_dir=" + (dir / "map").string(), dir).code == 0);
  const GrayImage img = read_pgm(dir / "map" / "activation_sinusoidal.pgm");
  CHECK(img.height == 30);
  CHECK(img.width == 20);

  REQUIRE(sinit_cli("depth-propagation --input_dim=32 --widths=40,40,40 --mc_samples=2000 --bins=7 --output_dir=" + (dir / "depth").string(), dir).code == 0);
  std::size_t hist_files = 0;
  for (const auto& e : fs::directory_iterator(dir / "depth"))
    hist_files += e.path().filename().string().starts_with("s_hist_layer");
  CHECK(hist_files == 3);
  const CsvTable h2 = read_csv(dir / "depth" / "s_hist_layer2.csv");
  CHECK(h2.rows.size() == 7);
  std::size_t total = 0;
  for (const auto& row : h2.rows) total += std::stoul(row[2]) + std::stoul(row[3]);
  CHECK(total == 40);

  REQUIRE(sinit_cli("threshold-mc --n_grid=16,32 --neurons=50 --mc_samples=500 --output_dir=" + (dir / "thr").string(), dir).code == 0);
  const CsvTable thr = read_csv(dir / "thr" / "threshold_mc.csv");
  CHECK(thr.rows.size() == 2);
  for (const auto& row : thr.rows) {
    CHECK(number(row[3]) >= 0.0);
    CHECK(number(row[3]) <= 1.0);
  }

  REQUIRE(sinit_cli("train-bench --samples=300 --dim=8 --classes=3 --hidden=8 --epochs=4 --seeds=1,2 --optimizers=adamw,sgd --output_dir=" + (dir / "train").string(), dir).code == 0);
  const CsvTable summary = read_csv(dir / "train" / "summary.csv");
  CHECK(summary.rows.size() == 2 * 2 * 2);
  for (const auto& row : summary.rows) {
    const CsvTable curve =
        read_csv(dir / "train" / ("train_" + row[0] + "_" + row[1] + "_seed" + row[2] + ".csv"));
    CHECK(curve.rows.size() == 4);
    double area = 0.0;
    for (std::size_t e = 1; e < curve.rows.size(); ++e)
      area += 0.5 * (number(curve.rows[e - 1][2]) + number(curve.rows[e][2]));
    CHECK(std::abs(area - number(row[6])) <= 1e-9);
  }

  REQUIRE(sinit_cli("oui" + mlp + " --samples=30 --output_dir=" + (dir / "oui").string(), dir).code == 0);
  const CsvTable o = read_csv(dir / "oui" / "oui.csv");
  CHECK(o.rows.size() == 5);
  for (const auto& row : o.rows) {
    CHECK(number(row[4]) >= 0.0);
    CHECK(number(row[4]) <= 1.0);
  }

  CHECK(sinit_cli("oui" + mlp + " --layer=3 --output_dir=" + (dir / "bad").string(), dir).code != 0);
}
