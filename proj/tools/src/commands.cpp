#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "pyrofit/config.hpp"
#include "pyrofit/errors.hpp"
#include "pyrofit/frame_io.hpp"
#include "pyrofit/protocol.hpp"
#include "pyrofit/pyro.hpp"
#include "pyrofit/session.hpp"
#include "pyrofit/synthetic.hpp"
#include "server.hpp"

namespace pyrofit::tools {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "JSON config file (flat snake_case keys)");
    cmd->add_option("--set", overrides, "Override one config key, KEY=VALUE (repeatable)");
  }

  EngineConfig build() const {
    EngineConfig cfg;
    if (!file.empty()) cfg = load_config_file(file);
    for (const auto& o : overrides) apply_override(cfg, o);
    cfg.validate();
    return cfg;
  }
};

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json stats_json(const ScoreStats& st) {
  return json{{"mean_S", optional_number(st.mean)}, {"max_S", optional_number(st.max)}, {"min_S", optional_number(st.min)}};
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedRecord(0, "cannot open " + path);
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError("cannot write " + path.string());
  return out;
}

// --- score -----------------------------------------------------------------

struct ScoreArgs {
  std::string demo;
  std::string user;
  std::string report;
  ConfigArgs config;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const EngineConfig cfg = a.config.build();
  const DemoTrack demo = load_demo_track(a.demo, cfg.reduce);
  std::ifstream user_in = open_input(a.user);
  const KeypointStream user = read_keypoint_stream(user_in);

  std::optional<std::ofstream> report;
  if (!a.report.empty()) report.emplace(open_output(a.report));

  std::vector<double> scores;
  scores.reserve(user.frames.size());
  for (const KeypointFrame& frame : user.frames) {
    json line;
    try {
      const Pose13 pose = reduce_to_pose13(frame, cfg.reduce);
      const SimilarityResult r = align_and_score(pose, demo, cfg.scoring, cfg.limb_graph);
      json delta = json::array();
      for (std::size_t k = 0; k < kAnglePairCount; ++k) {
        delta.push_back(r.per_joint.valid[k] ? json(r.per_joint.delta_deg[k]) : json(nullptr));
      }
      line = json{{"t_ms", frame.t_ms},
                  {"S", r.S},
                  {"D", r.D},
                  {"matched_demo_t_ms", r.matched_demo_t_ms},
                  {"delta_deg", std::move(delta)}};
      scores.push_back(r.S);
    } catch (const Error& e) {
      line = json{{"t_ms", frame.t_ms}, {"S", nullptr},          {"D", nullptr},
                  {"matched_demo_t_ms", nullptr}, {"delta_deg", nullptr}, {"error", e.what()}};
    }
    if (report) *report << line.dump() << '\n';
  }

  const json summary = stats_json(score_stats(scores));
  if (report) *report << summary.dump() << '\n';
  out << summary.dump() << '\n';
  return kExitOk;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string specs;
  int steps = 0;
  std::string format = "jsonl";
  std::string out_dir;
  bool digest = false;
  int width_px = 320;
  int height_px = 192;
  ConfigArgs config;
};

std::vector<FireworkSpec> read_specs(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<FireworkSpec> specs;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t start = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedRecord(start, "invalid JSON");
    try {
      specs.push_back(firework_from_json(j));
    } catch (const MalformedRecord& e) {
      throw MalformedRecord(start, e.reason());
    }
  }
  return specs;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const EngineConfig cfg = a.config.build();
  const std::vector<FireworkSpec> specs = read_specs(a.specs);

  std::optional<std::ofstream> jsonl;
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    if (a.format == "jsonl") jsonl.emplace(open_output(fs::path(a.out_dir) / "frames.jsonl"));
  }

  int index = 0;
  const auto on_frame = [&](const Frame& frame) {
    ++index;
    if (a.out_dir.empty()) return;
    if (jsonl) {
      *jsonl << to_json(frame).dump() << '\n';
      return;
    }
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05d.ppm", index);
    std::ofstream ppm = open_output(fs::path(a.out_dir) / name);
    const std::string bytes = render_ppm(frame, cfg.scene, a.width_px, a.height_px);
    ppm.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };

  const std::uint64_t digest = run_deterministic(specs, a.steps, cfg.scene, on_frame);
  if (a.digest) out << digest_hex(digest) << '\n';
  return kExitOk;
}

// --- replay ----------------------------------------------------------------

struct ReplayArgs {
  std::string session;
  std::string demo;
  std::uint64_t seed = 1;
  std::string out_path;
  ConfigArgs config;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out) {
  const EngineConfig cfg = a.config.build();
  auto demo = std::make_shared<const DemoTrack>(load_demo_track(a.demo, cfg.reduce));

  std::ifstream in = open_input(a.session);
  std::optional<std::ofstream> file;
  if (!a.out_path.empty()) file.emplace(open_output(a.out_path));
  std::ostream& sink = file ? static_cast<std::ostream&>(*file) : out;

  Session session = open_session(demo, cfg, a.seed, "replay-" + digest_hex(a.seed));
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t start = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MalformedRecord(start, "invalid JSON");
    // Recorded protocol streams carry hello/bye around the frames.
    if (const auto t = j.find("type"); t != j.end() && *t != "frame") continue;
    KeypointFrame frame;
    try {
      frame = frame_from_json(j);
    } catch (const MalformedRecord& e) {
      throw MalformedRecord(start, e.reason());
    }
    try {
      for (const Event& e : session.ingest_frame(frame)) sink << to_json(e).dump() << '\n';
    } catch (const OutOfOrderFrame& e) {
      sink << diagnostic_message(e.what()).dump() << '\n';
    }
  }
  json summary = to_json(session.close());
  summary["type"] = "summary";
  sink << summary.dump() << '\n';
  return kExitOk;
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::vector<std::string> demos;
  std::string host = "0.0.0.0";
  std::uint16_t port = 8765;
  std::uint64_t seed = 1;
  int threads = 2;
  std::string store;
  std::string record_dir;
  ConfigArgs config;
};

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

std::shared_ptr<const DemoCatalog> load_catalog(const std::vector<std::string>& paths, const ReduceOptions& opts) {
  auto catalog = std::make_shared<DemoCatalog>();
  for (const auto& p : paths) {
    auto track = std::make_shared<DemoTrack>(load_demo_track(p, opts));
    if (track->name.empty()) track->name = fs::path(p).stem().string();
    (*catalog)[track->name] = std::move(track);
  }
  return catalog;
}

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  ServerOptions opt;
  opt.config = a.config.build();
  opt.catalog = load_catalog(a.demos, opt.config.reduce);
  opt.host = a.host;
  opt.port = a.port;
  opt.seed = a.seed;
  opt.threads = a.threads;
  if (!a.store.empty()) opt.store = a.store;
  if (!a.record_dir.empty()) {
    fs::create_directories(a.record_dir);
    opt.record_dir = a.record_dir;
  }
  opt.log = &err;

  SessionServer server(opt);
  std::uint16_t port = 0;
  try {
    port = server.start();
  } catch (const std::system_error& e) {
    err << "cannot listen on " << a.host << ":" << a.port << ": " << e.what() << '\n';
    return kExitRuntime;
  }
  out << "serving " << opt.catalog->size() << " demo(s) on ws://" << a.host << ":" << port << opt.path << std::endl;

  g_interrupted = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return kExitOk;
}

// --- synth / export --------------------------------------------------------

struct SynthArgs {
  std::string out_path;
  double seconds = 30.0;
  double fps = 30.0;
  std::string name = "routine";
  double phase_s = 0.0;
  double jitter_px = 0.0;
  std::uint64_t seed = 1;
  std::int64_t offset_ms = 0;
  bool frames_only = false;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  RoutineParams p;
  p.phase_s = a.phase_s;
  p.jitter_px = a.jitter_px;
  p.noise_seed = a.seed;
  const KeypointStream stream = shifted(synthetic_track(a.seconds, a.fps, a.name, p), a.offset_ms);

  std::optional<std::ofstream> file;
  if (!a.out_path.empty()) file.emplace(open_output(a.out_path));
  std::ostream& sink = file ? static_cast<std::ostream&>(*file) : out;
  if (!a.frames_only) sink << header_to_json(*stream.header).dump() << '\n';
  for (const KeypointFrame& f : stream.frames) sink << serialize_frame(f) << '\n';
  return kExitOk;
}

struct VectorsArgs {
  ConfigArgs config;
  std::string out_path;
  std::uint64_t seed = 1;
  std::vector<int> steps = {10, 30, 60};
};

int cmd_vectors(const VectorsArgs& a, std::ostream& out) {
  const EngineConfig cfg = a.config.build();
  std::vector<int> steps = a.steps;
  std::sort(steps.begin(), steps.end());

  std::optional<std::ofstream> file;
  if (!a.out_path.empty()) file.emplace(open_output(a.out_path));
  std::ostream& sink = file ? static_cast<std::ostream&>(*file) : out;

  SplitMix64 seeds(a.seed);
  for (Shape shape : {Shape::Star, Shape::Ball, Shape::Cluster}) {
    for (Size size : {Size::Large, Size::Medium, Size::Small, Size::Tiny}) {
      FireworkSpec spec;
      spec.origin = {cfg.scene.width / 2, cfg.scene.height / 2};
      spec.shape = shape;
      spec.size = size;
      spec.color = Color::Multi;
      spec.seed = seeds.next();
      std::vector<Firework> scene = {spawn(spec, cfg.scene)};
      int done = 0;
      for (int target : steps) {
        for (; done < target; ++done) step(scene, cfg.scene);
        json particles = json::array();
        json rocket = nullptr;
        if (!scene.empty()) {
          const Firework& fw = scene.front();
          if (fw.phase == Phase::Launching) rocket = json::array({fw.rocket.pos.x, fw.rocket.pos.y});
          for (const Particle& p : fw.particles) particles.push_back(json::array({p.pos.x, p.pos.y}));
        }
        sink << json{{"spec", to_json(spec)}, {"step", target}, {"rocket", rocket}, {"particles", particles}}.dump()
             << '\n';
      }
    }
  }
  return kExitOk;
}

int cmd_export(const std::string& store, std::ostream& out) {
  out << export_csv(store);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pyrofit: pose-similarity scoring and firework rewards for calisthenics training"};
  app.require_subcommand(1);

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Score a user keypoint stream against a demo track");
  score_cmd->add_option("--demo", score_args.demo, "Demo track (JSONL with header)")->required();
  score_cmd->add_option("--user", score_args.user, "User keypoint stream (JSONL)")->required();
  score_cmd->add_option("--report", score_args.report, "Write the per-frame score report here");
  score_args.config.attach(score_cmd);

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate fireworks from a spec file");
  sim_cmd->add_option("--specs", sim_args.specs, "FireworkSpec JSONL")->required();
  sim_cmd->add_option("--steps", sim_args.steps, "Number of fixed steps")->required()->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--format", sim_args.format, "Frame dump format")->check(CLI::IsMember({"jsonl", "ppm"}));
  sim_cmd->add_option("--out", sim_args.out_dir, "Directory for frame dumps");
  sim_cmd->add_flag("--digest", sim_args.digest, "Print the frame digest");
  sim_cmd->add_option("--width-px", sim_args.width_px, "PPM width")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--height-px", sim_args.height_px, "PPM height")->check(CLI::PositiveNumber);
  sim_args.config.attach(sim_cmd);

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Serve live sessions over WebSocket at /session");
  serve_cmd->add_option("--demo", serve_args.demos, "Demo track (repeatable)")->required();
  serve_cmd->add_option("--host", serve_args.host, "Bind address");
  serve_cmd->add_option("--port", serve_args.port, "TCP port (0 = ephemeral)");
  serve_cmd->add_option("--seed", serve_args.seed, "Root seed for session seed streams");
  serve_cmd->add_option("--threads", serve_args.threads, "I/O threads")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--store", serve_args.store, "Append session summaries to this JSONL store");
  serve_cmd->add_option("--record", serve_args.record_dir, "Record each session's messages into this directory");
  serve_args.config.attach(serve_cmd);

  ReplayArgs replay_args;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded frame stream through a fresh session");
  replay_cmd->add_option("--session", replay_args.session, "Recorded frames or protocol messages (JSONL)")->required();
  replay_cmd->add_option("--demo", replay_args.demo, "Demo track")->required();
  replay_cmd->add_option("--seed", replay_args.seed, "Session seed");
  replay_cmd->add_option("--out", replay_args.out_path, "Write events here instead of stdout");
  replay_args.config.attach(replay_cmd);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic calisthenics keypoint track");
  synth_cmd->add_option("--out", synth_args.out_path, "Output file (stdout when omitted)");
  synth_cmd->add_option("--seconds", synth_args.seconds, "Duration")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--fps", synth_args.fps, "Frame rate")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--name", synth_args.name, "Track name written in the header");
  synth_cmd->add_option("--phase", synth_args.phase_s, "Routine phase offset in seconds");
  synth_cmd->add_option("--jitter", synth_args.jitter_px, "Uniform keypoint noise in pixels");
  synth_cmd->add_option("--seed", synth_args.seed, "Noise seed");
  synth_cmd->add_option("--offset-ms", synth_args.offset_ms, "Shift every timestamp");
  synth_cmd->add_flag("--frames-only", synth_args.frames_only, "Omit the track header");

  VectorsArgs vec_args;
  auto* vec_cmd = app.add_subcommand("vectors", "Write reference particle positions for every shape and size");
  vec_cmd->add_option("--out", vec_args.out_path, "Output file (stdout when omitted)");
  vec_cmd->add_option("--seed", vec_args.seed, "Seed for the spec seeds");
  vec_cmd->add_option("--steps", vec_args.steps, "Steps to sample (repeatable)")->check(CLI::NonNegativeNumber);
  vec_args.config.attach(vec_cmd);

  std::string export_store;
  auto* export_cmd = app.add_subcommand("export", "Export a summary store as CSV");
  export_cmd->add_option("--store", export_store, "Summary store (JSONL)")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*score_cmd) return cmd_score(score_args, out);
    if (*sim_cmd) return cmd_simulate(sim_args, out);
    if (*serve_cmd) return cmd_serve(serve_args, out, err);
    if (*replay_cmd) return cmd_replay(replay_args, out);
    if (*synth_cmd) return cmd_synth(synth_args, out);
    if (*vec_cmd) return cmd_vectors(vec_args, out);
    if (*export_cmd) return cmd_export(export_store, out);
  } catch (const MalformedRecord& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const EmptyTrack& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace pyrofit::tools
