#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "pact/container.hpp"

namespace pact {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pact_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small desk problem: 16 x 16 grid, 16 sensors.
  void simulate(const std::string& out, std::size_t frames = 8) {
    ASSERT_EQ(cli::run({"simulate", "--n", "16", "--sensors", "16", "--frames",
                        std::to_string(frames), "--out-dir", path(out)}),
              0);
  }

  void write(const std::string& name, const std::string& text) {
    std::ofstream(path(name)) << text;
  }

  static json read_json(const std::string& file) {
    std::ifstream in(file);
    return json::parse(in);
  }

  fs::path dir_;
};

TEST_F(Cli, HelpListsExitCodes) {
  EXPECT_EQ(cli::run({"--help"}), 0);
  const std::string help = cli::exit_code_help();
  EXPECT_NE(help.find("9  shape_mismatch"), std::string::npos);
  EXPECT_NE(help.find("8  config_schema"), std::string::npos);
}

TEST_F(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(cli::run({"reconstruct"}), 2);
  EXPECT_EQ(cli::run({}), 2);
  EXPECT_EQ(cli::run({"recon-das", "--in", "x"}), 2);
}

TEST_F(Cli, SimulateDasEvaluate) {
  simulate("sim");
  EXPECT_TRUE(fs::exists(path("sim/manifest.json")));
  ASSERT_EQ(cli::run({"recon-das", "--in", path("sim/sinogram.pact"), "--n", "16", "--out",
                      path("das.pact")}),
            0);
  ASSERT_EQ(cli::run({"evaluate", "--reference", path("sim/truth.pact"), "--estimate",
                      path("das.pact"), "--json", path("report.json"), "--csv", path("report.csv")}),
            0);
  const json report = read_json(path("report.json"));
  EXPECT_EQ(report["frames"], 8);
  EXPECT_EQ(report["psnr_db"].size(), 8u);
  std::ifstream csv(path("report.csv"));
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  EXPECT_EQ(lines, 9u);
  EXPECT_TRUE(fs::exists(path("das.pact.manifest.json")));
  EXPECT_TRUE(fs::exists(path("report.json.manifest.json")));
}

TEST_F(Cli, SubsampleAndUbp) {
  simulate("sim");
  ASSERT_EQ(cli::run({"subsample", "--in", path("sim/sinogram.pact"), "--keep", "8", "--out",
                      path("sparse.pact")}),
            0);
  EXPECT_EQ(read_sinogram(path("sparse.pact")).sensors(), 8u);
  EXPECT_EQ(cli::run({"subsample", "--in", path("sim/sinogram.pact"), "--keep", "5", "--out",
                      path("bad.pact")}),
            10);
  ASSERT_EQ(cli::run({"recon-ubp", "--in", path("sparse.pact"), "--n", "16", "--keep-negative",
                      "--out", path("ubp.pact")}),
            0);
  const auto manifest = read_json(path("ubp.pact.manifest.json"));
  EXPECT_EQ(manifest["options"]["keep_negative"], true);
  EXPECT_LT(manifest["raw_range"][0].get<double>(), 0.0);
}

TEST_F(Cli, InrThenUpsample) {
  simulate("sim");
  write("cfg.json", R"({"iterations": 100, "L": 32, "hidden": [32, 32], "seed": 5})");
  ASSERT_EQ(cli::run({"recon-inr", "--in", path("sim/sinogram.pact"), "--config", path("cfg.json"),
                      "--n", "16", "--quiet", "--out", path("inr.pact")}),
            0);
  EXPECT_EQ(read_image_sequence(path("inr.pact")).frames(), 8u);
  const auto manifest = read_json(path("inr.pact.manifest.json"));
  EXPECT_TRUE(manifest["resolved_config"]["lambda_d"].is_number());
  EXPECT_EQ(manifest["options"]["config"]["lambda_d"], "auto");

  std::ifstream log(path("inr.pact.log.csv"));
  std::size_t rows = 0;
  for (std::string line; std::getline(log, line);) ++rows;
  EXPECT_EQ(rows, 101u);

  ASSERT_EQ(cli::run({"upsample", "--checkpoint", path("inr.pact.ckpt"), "--factor", "4", "--out",
                      path("up.pact")}),
            0);
  EXPECT_EQ(read_image_sequence(path("up.pact")).frames(), 4u * 7u + 1u);
}

TEST_F(Cli, IdenticalRunsGiveIdenticalContainers) {
  simulate("sim");
  write("cfg.json", R"({"iterations": 20, "L": 16, "hidden": [16], "seed": 2})");
  for (const char* name : {"a.pact", "b.pact"})
    ASSERT_EQ(cli::run({"recon-inr", "--in", path("sim/sinogram.pact"), "--config",
                        path("cfg.json"), "--n", "16", "--quiet", "--out", path(name),
                        "--checkpoint", path("ckpt"), "--log", path("log.csv")}),
              0);
  EXPECT_EQ(file_crc32(path("a.pact")), file_crc32(path("b.pact")));
  auto ma = read_json(path("a.pact.manifest.json")), mb = read_json(path("b.pact.manifest.json"));
  EXPECT_EQ(ma["options"], mb["options"]);
  EXPECT_EQ(ma["outputs"]["image"]["crc32"], mb["outputs"]["image"]["crc32"]);
}

TEST_F(Cli, ErrorCodes) {
  simulate("sim8");
  simulate("sim4", 4);
  EXPECT_EQ(cli::run({"evaluate", "--reference", path("sim8/truth.pact"), "--estimate",
                      path("sim4/truth.pact")}),
            9);
  EXPECT_EQ(cli::run({"recon-das", "--in", path("missing.pact"), "--out", path("x.pact")}), 3);
  EXPECT_EQ(cli::run({"recon-das", "--in", path("sim8/truth.pact"), "--out", path("x.pact")}), 7);
  write("bad.json", R"({"iterations": 10, "learning_rate": 1})");
  EXPECT_EQ(cli::run({"recon-inr", "--in", path("sim8/sinogram.pact"), "--config",
                      path("bad.json"), "--out", path("x.pact")}),
            8);
  EXPECT_EQ(cli::run({"export", "--in", path("sim8/truth.pact"), "--dir", path("frames"),
                      "--format", "tiff"}),
            10);

  // Flip one payload byte: checksum error.
  const auto file = path("sim8/sinogram.pact");
  std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(-8, std::ios::end);
  char c = 0;
  f.read(&c, 1);
  c ^= 0x10;
  f.seekp(-8, std::ios::end);
  f.write(&c, 1);
  f.close();
  EXPECT_EQ(cli::run({"recon-das", "--in", file, "--n", "16", "--out", path("x.pact")}), 4);
}

TEST_F(Cli, ExportFrames) {
  simulate("sim");
  ASSERT_EQ(cli::run({"export", "--in", path("sim/truth.pact"), "--dir", path("frames"),
                      "--format", "pgm"}),
            0);
  std::size_t images = 0;
  for (const auto& e : fs::directory_iterator(path("frames")))
    if (e.path().extension() == ".pgm") ++images;
  EXPECT_EQ(images, 8u);
  EXPECT_TRUE(fs::exists(path("frames/frame_007.pgm")));
  EXPECT_TRUE(fs::exists(path("frames/manifest.json")));
}

}  // namespace
}  // namespace pact
