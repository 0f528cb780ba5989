#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pact/baselines.hpp"
#include "pact/checkpoint.hpp"
#include "pact/config.hpp"
#include "pact/container.hpp"
#include "pact/error.hpp"
#include "pact/export.hpp"
#include "pact/forward.hpp"
#include "pact/metrics.hpp"
#include "pact/parallel.hpp"
#include "pact/phantom.hpp"
#include "pact/trainer.hpp"

namespace pact::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr ErrorCode all_codes[] = {
    ErrorCode::internal,          ErrorCode::usage,           ErrorCode::io,
    ErrorCode::checksum_mismatch, ErrorCode::truncated_payload, ErrorCode::container_dimensions,
    ErrorCode::kind_mismatch,     ErrorCode::config_schema,   ErrorCode::shape_mismatch,
    ErrorCode::invalid_argument,  ErrorCode::numerical,
};

struct GridOptions {
  std::size_t n = desk::grid_size;
  double fov = desk::field_of_view;

  ImageGrid make(const SensorGeometry& geom) const {
    return ImageGrid::centered(n, fov, geom.center);
  }
  json to_json() const { return {{"n", n}, {"fov", fov}}; }
};

void add_grid_options(CLI::App* cmd, GridOptions& grid) {
  cmd->add_option("--n", grid.n, "Reconstruction grid size (n x n)")->capture_default_str();
  cmd->add_option("--fov", grid.fov, "Reconstruction field of view, meters")->capture_default_str();
}

json geometry_json(const SensorGeometry& g) {
  return {{"sensors", g.sensor_count()},  {"radius", g.radius},
          {"center", {g.center.x, g.center.y}}, {"sound_speed", g.sound_speed},
          {"sample_rate", g.sample_rate}, {"num_samples", g.num_samples},
          {"t_start", g.t_start}};
}

json file_entry(const fs::path& path) {
  return {{"path", path.string()}, {"crc32", file_crc32(path)}};
}

// Deliberately free of timestamps and timings, so identical runs write
// identical manifests.
void write_manifest(const fs::path& path, const std::string& command, json options,
                    json inputs, json outputs, json extra = json::object()) {
  json m = {{"tool", "pact"},
            {"version", PACT_VERSION_STRING},
            {"command", command},
            {"options", std::move(options)},
            {"inputs", std::move(inputs)},
            {"outputs", std::move(outputs)}};
  for (auto& [key, value] : extra.items()) m[key] = value;
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::io, "cannot write manifest " + path.string());
  out << m.dump(2) << '\n';
  require(static_cast<bool>(out), ErrorCode::io, "write failed: " + path.string());
}

fs::path manifest_for(const fs::path& output) {
  return fs::path(output.string() + ".manifest.json");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create directory " + dir.string() + ": " + ec.message());
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

ForwardOperator operator_for(const Sinogram& y, const ImageGrid& grid) {
  return build_forward_operator(grid, y.geometry(),
                                {y.signal() == SignalKind::pressure});
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string phantom;
  std::size_t frames = 8;
  GridOptions grid;
  std::size_t sensors = desk::sensors;
  double radius = desk::ring_radius;
  double sound_speed = desk::sound_speed;
  double sample_rate = desk::sample_rate;
  std::size_t samples = 0;
  double t_start = 0.0;
  bool derivative = false;
  double snr = noiseless;
  std::uint64_t noise_seed = 0;
  std::string out_dir;
};

void simulate(const SimulateArgs& a) {
  const PhantomSpec spec =
      a.phantom.empty() ? phantoms::two_disc_moving(a.frames) : load_phantom(a.phantom);
  const ImageGrid grid = ImageGrid::centered(a.grid.n, a.grid.fov);
  const std::size_t samples =
      a.samples ? a.samples
                : required_num_samples(grid, a.radius, {}, a.sound_speed, a.sample_rate, a.t_start);
  const auto geom =
      make_ring_array(a.sensors, a.radius, {}, a.sound_speed, a.sample_rate, samples, a.t_start);
  const auto truth = render_phantom(spec, grid);
  const auto op = build_forward_operator(grid, geom, {a.derivative});
  auto sino = apply_forward(op, truth);
  if (std::isfinite(a.snr)) sino = add_noise(sino, a.snr, a.noise_seed);

  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  write_container(dir / "truth.pact", truth);
  write_container(dir / "sinogram.pact", sino);
  json options = {{"grid", a.grid.to_json()},
                  {"geometry", geometry_json(geom)},
                  {"derivative", a.derivative},
                  {"snr_db", std::isfinite(a.snr) ? json(a.snr) : json("inf")},
                  {"noise_seed", a.noise_seed},
                  {"phantom", json::parse(phantom_to_json(spec))}};
  json inputs = json::object();
  if (!a.phantom.empty()) inputs["phantom"] = file_entry(a.phantom);
  write_manifest(dir / "manifest.json", "simulate", options, inputs,
                 {{"truth", file_entry(dir / "truth.pact")},
                  {"sinogram", file_entry(dir / "sinogram.pact")}},
                 {{"seeds", {{"phantom", spec.seed}, {"noise", a.noise_seed}}}});
}

// --- subsample --------------------------------------------------------------

void subsample(const std::string& in, std::size_t keep, const std::string& out) {
  const auto sino = read_sinogram(in).subsample(keep);
  ensure_parent(out);
  write_container(out, sino);
  write_manifest(manifest_for(out), "subsample", {{"keep", keep}}, {{"sinogram", file_entry(in)}},
                 {{"sinogram", file_entry(out)}});
}

// --- recon-das / recon-ubp --------------------------------------------------

void backproject(bool ubp, const std::string& in, const GridOptions& grid_opts, bool keep_negative,
                 const std::string& out) {
  const auto sino = read_sinogram(in);
  const auto grid = grid_opts.make(sino.geometry());
  BackprojectionStats stats;
  const BackprojectionOptions options{!keep_negative};
  const auto image = ubp ? reconstruct_ubp(sino, grid, options, &stats)
                         : reconstruct_das(sino, grid, options, &stats);
  ensure_parent(out);
  write_container(out, image);
  write_manifest(manifest_for(out), ubp ? "recon-ubp" : "recon-das",
                 {{"grid", grid_opts.to_json()}, {"keep_negative", keep_negative}},
                 {{"sinogram", file_entry(in)}}, {{"image", file_entry(out)}},
                 {{"raw_range", {stats.raw_min, stats.raw_max}}});
}

// --- recon-inr --------------------------------------------------------------

struct InrArgs {
  std::string in;
  std::string config;
  GridOptions grid;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string checkpoint;
  std::string log;
  bool quiet = false;
};

void recon_inr(const InrArgs& a) {
  TrainConfig cfg = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
  if (a.iterations) cfg.iterations = *a.iterations;
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();

  const auto y = read_sinogram(a.in);
  const auto grid = a.grid.make(y.geometry());
  const auto op = operator_for(y, grid);

  const fs::path ckpt_dir = a.checkpoint.empty() ? fs::path(a.out + ".ckpt") : fs::path(a.checkpoint);
  const fs::path log_path = a.log.empty() ? fs::path(a.out + ".log.csv") : fs::path(a.log);
  ensure_parent(a.out);
  ensure_dir(ckpt_dir);
  ensure_parent(log_path);
  std::ofstream log(log_path);
  require(static_cast<bool>(log), ErrorCode::io, "cannot write log " + log_path.string());
  log << log_header() << '\n';

  FitHooks hooks;
  hooks.on_log = [&](const LogRow& row) {
    log << format_log_row(row) << '\n';
    if (!a.quiet) std::fprintf(stderr, "%s\n", format_log_row(row).c_str());
  };
  hooks.on_checkpoint = [&](std::size_t it, const InrModel& model) {
    char name[32];
    std::snprintf(name, sizeof name, "iter_%06zu", it);
    save_checkpoint(ckpt_dir / name, {model, it, cfg.precision, grid, y.frame_times()});
  };
  const auto result = fit(y, op, cfg, hooks);
  log.close();
  require(static_cast<bool>(log), ErrorCode::io, "write failed: " + log_path.string());

  save_checkpoint(ckpt_dir,
                  {result.model, cfg.iterations, cfg.precision, grid, result.trained_frame_times});
  const auto image = render_at_times(result.model, grid, result.trained_frame_times,
                                     result.trained_frame_times, cfg.precision);
  write_container(a.out, image);

  json resolved = json::parse(train_config_to_json(cfg));
  resolved["lambda_d"] = result.lambda_d;
  resolved["lambda_l"] = result.lambda_l;
  json inputs = {{"sinogram", file_entry(a.in)}};
  if (!a.config.empty()) inputs["config"] = file_entry(a.config);
  write_manifest(manifest_for(a.out), "recon-inr",
                 {{"grid", a.grid.to_json()}, {"config", json::parse(train_config_to_json(cfg))}},
                 inputs,
                 {{"image", file_entry(a.out)},
                  {"checkpoint", file_entry(ckpt_dir / "weights.bin")},
                  {"log", file_entry(log_path)}},
                 {{"resolved_config", resolved}, {"seeds", {{"model", cfg.seed}}}});
}

// --- upsample ---------------------------------------------------------------

void upsample(const std::string& checkpoint, std::size_t factor, const std::string& out) {
  const auto ckpt = load_checkpoint(checkpoint);
  const auto image = temporal_superresolve(ckpt.model, factor, ckpt.grid,
                                           ckpt.trained_frame_times, ckpt.precision);
  ensure_parent(out);
  write_container(out, image);
  write_manifest(manifest_for(out), "upsample", {{"factor", factor}},
                 {{"checkpoint", file_entry(fs::path(checkpoint) / "weights.bin")}},
                 {{"image", file_entry(out)}}, {{"seeds", {{"model", ckpt.model.encoder.seed}}}});
}

// --- evaluate ---------------------------------------------------------------

void evaluate_cmd(const std::string& reference, const std::string& estimate,
                  const std::string& out_json, const std::string& out_csv) {
  const auto report = evaluate(read_image_sequence(reference), read_image_sequence(estimate));
  if (report.psnr.excluded > 0)
    std::fprintf(stderr, "warning: %zu identical frame(s) excluded from the mean PSNR\n",
                 report.psnr.excluded);
  json outputs = json::object();
  if (out_json.empty()) {
    std::cout << report.to_json() << '\n';
  } else {
    ensure_parent(out_json);
    std::ofstream(out_json) << report.to_json() << '\n';
    outputs["report"] = file_entry(out_json);
  }
  if (!out_csv.empty()) {
    ensure_parent(out_csv);
    std::ofstream(out_csv) << report.to_csv();
    outputs["table"] = file_entry(out_csv);
  }
  if (!out_json.empty())
    write_manifest(manifest_for(out_json), "evaluate", json::object(),
                   {{"reference", file_entry(reference)}, {"estimate", file_entry(estimate)}},
                   outputs);
}

// --- export -----------------------------------------------------------------

void export_cmd(const std::string& in, const std::string& dir, const std::string& format,
                bool normalize) {
  auto seq = read_image_sequence(in);
  if (normalize) seq = normalize_sequence(seq);
  const auto files = export_frames(seq, dir, image_format_from_string(format));
  json outputs = json::array();
  for (const auto& f : files) outputs.push_back(file_entry(f));
  write_manifest(fs::path(dir) / "manifest.json", "export",
                 {{"format", format}, {"normalize", normalize}}, {{"image", file_entry(in)}},
                 {{"frames", outputs}});
}

void print_error(ErrorCode code, const std::string& message) {
  const json line = {{"error", std::string(to_string(code))},
                     {"code", static_cast<int>(code)},
                     {"message", message}};
  std::cerr << line.dump() << std::endl;
}

}  // namespace

std::string exit_code_help() {
  std::ostringstream s;
  s << "Exit status:\n  0  success\n";
  for (ErrorCode c : all_codes)
    s << "  " << static_cast<int>(c) << (static_cast<int>(c) < 10 ? "  " : " ") << to_string(c)
      << '\n';
  s << "Failures also print one JSON line {\"error\", \"code\", \"message\"} to stderr.\n";
  return s.str();
}

int run(std::vector<std::string> args) {
  CLI::App app{"Sparse-view dynamic photoacoustic tomography toolkit", "pact"};
  app.require_subcommand(1);
  app.footer(exit_code_help());
  app.set_version_flag("--version", PACT_VERSION_STRING);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: hardware default)");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Render a phantom and simulate its sinogram");
  c_sim->add_option("--phantom", sim.phantom, "Phantom spec (JSON); default: two-disc phantom");
  c_sim->add_option("--frames", sim.frames, "Frames of the default phantom")->capture_default_str();
  add_grid_options(c_sim, sim.grid);
  c_sim->add_option("--sensors", sim.sensors, "Ring sensors")->capture_default_str();
  c_sim->add_option("--radius", sim.radius, "Ring radius, meters")->capture_default_str();
  c_sim->add_option("--sound-speed", sim.sound_speed, "m/s")->capture_default_str();
  c_sim->add_option("--sample-rate", sim.sample_rate, "Hz")->capture_default_str();
  c_sim->add_option("--samples", sim.samples, "Samples per trace (0: just enough to cover the grid)");
  c_sim->add_option("--t-start", sim.t_start, "Time of the first sample, seconds");
  c_sim->add_flag("--derivative", sim.derivative, "Record pressure (time derivative) traces");
  c_sim->add_option("--snr", sim.snr, "Add Gaussian noise at this SNR in dB");
  c_sim->add_option("--noise-seed", sim.noise_seed, "Noise seed");
  c_sim->add_option("--out-dir", sim.out_dir, "Writes truth.pact, sinogram.pact, manifest.json")
      ->required();

  std::string in, out;
  std::size_t keep = 0;
  auto* c_sub = app.add_subcommand("subsample", "Keep every (S/keep)-th sensor");
  c_sub->add_option("--in", in, "Sinogram container")->required();
  c_sub->add_option("--keep", keep, "Sensors to keep; must divide S")->required();
  c_sub->add_option("--out", out, "Output sinogram")->required();

  GridOptions grid;
  bool keep_negative = false;
  auto* c_das = app.add_subcommand("recon-das", "Delay-and-sum reconstruction");
  auto* c_ubp = app.add_subcommand("recon-ubp", "Universal back-projection reconstruction");
  for (auto* c : {c_das, c_ubp}) {
    c->add_option("--in", in, "Sinogram container")->required();
    c->add_option("--out", out, "Output image container")->required();
    add_grid_options(c, grid);
    c->add_flag("--keep-negative", keep_negative, "Do not clamp negative values to zero");
  }

  InrArgs inr;
  auto* c_inr = app.add_subcommand("recon-inr", "Neural-representation reconstruction");
  c_inr->add_option("--in", inr.in, "Sinogram container")->required();
  c_inr->add_option("--config", inr.config, "Training config (JSON)");
  c_inr->add_option("--out", inr.out, "Output image container")->required();
  c_inr->add_option("--checkpoint", inr.checkpoint, "Checkpoint directory (default <out>.ckpt)");
  c_inr->add_option("--log", inr.log, "Training log CSV (default <out>.log.csv)");
  c_inr->add_option("--iterations", inr.iterations, "Override config iterations");
  c_inr->add_option("--seed", inr.seed, "Override config seed");
  c_inr->add_flag("--quiet", inr.quiet, "Do not echo log rows to stderr");
  add_grid_options(c_inr, inr.grid);

  std::string checkpoint;
  std::size_t factor = 1;
  auto* c_up = app.add_subcommand("upsample", "Render a checkpoint at factor*(T-1)+1 times");
  c_up->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  c_up->add_option("--factor", factor, "Temporal upsampling factor")->required();
  c_up->add_option("--out", out, "Output image container")->required();

  std::string reference, estimate, out_json, out_csv;
  auto* c_eval = app.add_subcommand("evaluate", "PSNR / SSIM of an estimate against a reference");
  c_eval->add_option("--reference", reference, "Reference image container")->required();
  c_eval->add_option("--estimate", estimate, "Estimated image container")->required();
  c_eval->add_option("--json", out_json, "Report file (default: stdout)");
  c_eval->add_option("--csv", out_csv, "Per-frame table");

  std::string dir, format = "png";
  bool normalize = false;
  auto* c_exp = app.add_subcommand("export", "Write one 8-bit grayscale image per frame");
  c_exp->add_option("--in", in, "Image container")->required();
  c_exp->add_option("--dir", dir, "Output directory")->required();
  c_exp->add_option("--format", format, "pgm or png")->capture_default_str();
  c_exp->add_flag("--normalize", normalize, "Min-max normalize the stack first");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(ErrorCode::usage, e.what());
    return static_cast<int>(ErrorCode::usage);
  }

  try {
    set_thread_count(threads);
    if (c_sim->parsed()) simulate(sim);
    else if (c_sub->parsed()) subsample(in, keep, out);
    else if (c_das->parsed()) backproject(false, in, grid, keep_negative, out);
    else if (c_ubp->parsed()) backproject(true, in, grid, keep_negative, out);
    else if (c_inr->parsed()) recon_inr(inr);
    else if (c_up->parsed()) upsample(checkpoint, factor, out);
    else if (c_eval->parsed()) evaluate_cmd(reference, estimate, out_json, out_csv);
    else if (c_exp->parsed()) export_cmd(in, dir, format, normalize);
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    print_error(ErrorCode::internal, e.what());
    return static_cast<int>(ErrorCode::internal);
  }
  return 0;
}

}  // namespace pact::cli
