// spikescan: reproducible experiment front end. Every command writes its
// outputs and a manifest.json into --out; `rerun` replays a manifest.
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "spikescan/bench.hpp"
#include "spikescan/container.hpp"
#include "spikescan/energy.hpp"
#include "spikescan/error.hpp"
#include "spikescan/props.hpp"
#include "spikescan/tasks.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace spikescan;

namespace {

int code(ErrorCode c) { return static_cast<int>(c); }


struct Output {
  std::string name;
  bool deterministic = true;
};

// Collects outputs for one run and writes them under `dir`.
class Run {
 public:
  Run(std::string command, std::vector<std::string> argv, fs::path dir)
      : command_(std::move(command)), argv_(std::move(argv)), dir_(std::move(dir)),
        start_(std::chrono::steady_clock::now()), started_(std::time(nullptr)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& contents, bool deterministic = true) {
    write_file_atomic(dir_ / name, contents);
    outputs_.push_back({name, deterministic});
  }

  Json config = Json::object();
  std::uint64_t seed = 0;

  void finish(int exit_code) {
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&started_));
    Json outputs = Json::array();
    for (const Output& o : outputs_) outputs.push_back({{"path", o.name}, {"deterministic", o.deterministic}});
    const Json manifest{
        {"command", command_},
        {"argv", argv_},
        {"config", config},
        {"seed", seed},
        {"version", SPIKESCAN_VERSION},
        {"threads", omp_get_max_threads()},
        {"timings",
         {{"started_utc", stamp},
          {"wall_seconds",
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()}}},
        {"outputs", outputs},
        {"exit_code", exit_code}};
    write_file_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  fs::path dir_;
  std::vector<Output> outputs_;
  std::chrono::steady_clock::time_point start_;
  std::time_t started_;
};

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw DomainError("cannot parse list item '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---- bench -------------------------------------------------------------

struct BenchArgs {
  std::string neurons = "dsn,psn";
  std::string lengths = "1024,2048,4096,8192";
  BenchConfig cfg;
};

int cmd_bench(const BenchArgs& a, Run& run) {
  BenchConfig cfg = a.cfg;
  cfg.neurons = split(a.neurons);
  cfg.lengths = parse_list<std::size_t>(a.lengths);
  run.seed = cfg.seed;
  run.config = {{"neurons", cfg.neurons}, {"lengths", cfg.lengths}, {"batch", cfg.batch},
                {"channels", cfg.channels}, {"reps", cfg.reps}, {"warmup", cfg.warmup}};
  const auto rows = run_bench(cfg);
  Json slopes = Json::object();
  for (const auto& [neuron, slope] : bench_slopes(rows)) {
    slopes[neuron] = slope;
    std::cout << "slope " << neuron << " " << slope << "\n";
  }
  run.write("bench.csv", bench_csv(rows), false);
  run.write("bench_checksums.csv", bench_checksum_csv(rows));
  run.write("bench.json", Json{{"task", "bench"}, {"slopes", slopes}}.dump(2) + "\n", false);
  std::cout << bench_csv(rows);
  return 0;
}

// ---- props -------------------------------------------------------------

struct PropsArgs {
  std::string neuron;
  std::string property = "short-control";
  std::size_t delta = 8;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  double c_bound = 0.0;  // 0: 2 v_th
  std::size_t steps = 1000;
  std::size_t horizon = 100000;
};

int cmd_props(const PropsArgs& a, Run& run) {
  run.seed = a.seed;
  run.config = {{"neuron", a.neuron}, {"property", a.property}, {"delta", a.delta}, {"trials", a.trials},
                {"c_bound", a.c_bound}, {"steps", a.steps}, {"horizon", a.horizon}};
  Json out;
  bool matches = true;
  if (a.property == "conditions-table") {
    const auto neuron = make_table_neuron(a.neuron, a.seed);
    const ConditionsRow row = check_conditions_table(*neuron, a.seed);
    const auto expected = expected_conditions_row(a.neuron);
    out = Json::parse(to_json(row, expected));
    if (expected)
      matches = row.condition1 == expected->condition1 && row.condition2 == expected->condition2 &&
                row.condition3 == expected->condition3;
    auto mark = [](bool b) { return b ? "yes" : "no"; };
    std::cout << row.neuron << ": condition1 " << mark(row.condition1) << ", condition2 " << mark(row.condition2)
              << ", condition3 " << mark(row.condition3) << "\n";
  } else if (a.property == "short-control" || a.property == "long-control") {
    const auto expected = expected_control(a.neuron, a.property);
    const auto subject = make_subject(a.neuron, a.seed);
    ControlVerdict v;
    if (a.property == "short-control") {
      ShortControlOptions opt;
      opt.trials = a.trials;
      opt.seed = a.seed;
      v = check_short_control(*subject, a.delta, opt);
    } else {
      LongControlOptions opt;
      opt.trials = a.trials;
      opt.seed = a.seed;
      opt.horizon = a.horizon;
      const double c = a.c_bound > 0.0 ? a.c_bound : 2.0 * subject->v_th();
      v = check_long_control(*subject, c, a.steps, opt);
    }
    out = Json::parse(to_json(v));
    if (v.witness) out["witness_replayed"] = replay_witness(*subject, *v.witness);
    out["expected"] = expected ? Json(*expected) : Json(nullptr);
    matches = !expected || *expected == v.holds;
    out["matches"] = matches;
    std::cout << a.neuron << " " << a.property << ": " << (v.holds ? "holds" : "fails")
              << (expected ? (matches ? " (as expected)" : " (NOT as expected)") : " (no expectation)") << "\n";
  } else if (a.property == "lemma") {
    const std::size_t pairs = check_soft_reset_lemma(a.delta);
    out = {{"property", "lemma"}, {"max_delta", a.delta}, {"pairs", pairs}, {"holds", true}};
    std::cout << "lemma holds for " << pairs << " pairs\n";
  } else {
    throw DomainError("unknown property '" + a.property + "'");
  }
  run.write("verdict.json", out.dump(2) + "\n");
  return matches ? 0 : code(ErrorCode::kExpectationFailed);
}

// ---- approx ------------------------------------------------------------

struct ApproxArgs {
  std::string dataset = "a";
  std::string scale = "desk";
  int epochs = -1;  // -1: 30 (desk) or 100 (full)
  bool integer = false;
  std::size_t batch = 128;
  double lr = 1e-2;
  std::uint64_t seed = 0;
};

int cmd_approx(const ApproxArgs& a, Run& run) {
  const Scale scale = parse_scale(a.scale);
  TrainConfig cfg;
  cfg.epochs = a.epochs >= 0 ? static_cast<std::size_t>(a.epochs) : (scale == Scale::kDesk ? 30 : 100);
  cfg.batch_size = a.batch;
  cfg.peak_lr = a.lr;
  cfg.seed = a.seed;
  run.seed = a.seed;
  run.config = {{"dataset", a.dataset}, {"scale", a.scale}, {"epochs", cfg.epochs}, {"integer", a.integer},
                {"batch", cfg.batch_size}, {"peak_lr", cfg.peak_lr}};
  const Dataset data = approx_dataset(a.dataset, scale, a.seed);
  const ApproxResult r =
      run_approx_experiment(a.dataset, data, a.integer ? integer_approx_targets() : approx_targets(), cfg);
  const std::string csv = to_csv(r);
  run.write("approx.csv", csv);
  run.write("approx.json", to_json(r, a.seed) + "\n");
  std::cout << csv;
  return 0;
}

// ---- extrapolate -------------------------------------------------------

struct ExtrapolateArgs {
  std::string neuron = "dsn";
  std::size_t train_t = 256;
  std::string eval_t = "256,1024,4096";
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

int cmd_extrapolate(const ExtrapolateArgs& a, Run& run) {
  ExtrapolationConfig cfg;
  cfg.train.epochs = a.epochs;
  cfg.train.seed = a.seed;
  const auto lengths = parse_list<std::size_t>(a.eval_t);
  run.seed = a.seed;
  run.config = {{"neuron", a.neuron}, {"train_t", a.train_t}, {"eval_t", lengths}, {"epochs", a.epochs}};
  try {
    const ExtrapolationResult r = run_extrapolation(parse_neuron_kind(a.neuron), a.train_t, lengths, cfg);
    const std::string csv = to_csv(r);
    run.write("extrapolate.csv", csv);
    run.write("extrapolate.json", to_json(r, a.seed) + "\n");
    std::cout << csv;
    return 0;
  } catch (const LengthMismatch& e) {
    const Json j{{"task", "extrapolate"},
                 {"neuron", a.neuron},
                 {"seed", a.seed},
                 {"error", "length_mismatch"},
                 {"expected_length", e.expected_length},
                 {"actual_length", e.actual_length}};
    run.write("extrapolate.json", j.dump(2) + "\n");
    std::cerr << a.neuron << ": " << e.what() << "\n";
    return code(ErrorCode::kLengthMismatch);
  }
}

// ---- energy ------------------------------------------------------------

struct EnergyArgs {
  std::string neurons = "lif,psn,sliding-psn,dsn";
  std::size_t classes = 10;
  std::size_t steps = 32;
  std::string profile = "reconciled";
  std::string rates;  // empty: published rates
};

int cmd_energy(const EnergyArgs& a, Run& run) {
  if (a.profile != "literal" && a.profile != "reconciled") throw DomainError("unknown profile '" + a.profile + "'");
  const EnergyProfile profile = a.profile == "literal" ? EnergyProfile::literal() : EnergyProfile::reconciled();
  const auto names = split(a.neurons);
  if (!a.rates.empty() && names.size() != 1) throw DomainError("--rates needs exactly one neuron");
  run.config = {{"neurons", names}, {"classes", a.classes}, {"steps", a.steps}, {"profile", a.profile},
                {"rates", a.rates}};
  std::ostringstream summary;
  summary.precision(6);
  summary << "neuron,average_sfr,energy,published_energy,relative_error\n";
  Json rows = Json::array();
  for (const std::string& name : names) {
    const EnergyNeuron kind = parse_energy_neuron(name);
    const auto arch = scifar_architecture(kind, a.classes, a.steps);
    const auto rates = a.rates.empty() ? published_firing_rates(kind, a.classes) : parse_list<double>(a.rates);
    const EnergyReport r = estimate_energy(arch, rates, a.steps, profile);
    run.write("energy_" + name + ".csv", energy_csv(r));
    run.write("energy_" + name + ".json", energy_json(r) + "\n");
    const double avg = average_firing_rate(arch, rates);
    summary << name << ',' << avg << ',' << r.total << ',';
    Json row{{"neuron", name}, {"average_sfr", avg}, {"energy", r.total}};
    if (a.rates.empty()) {
      const double ref = published_energy_mj(kind, a.classes);
      summary << ref << ',' << (r.total - ref) / ref;
      row["published_energy"] = ref;
      row["relative_error"] = (r.total - ref) / ref;
    } else {
      summary << ',';
    }
    summary << '\n';
    rows.push_back(row);
  }
  run.write("energy_summary.csv", summary.str());
  run.write("energy_summary.json",
            Json{{"task", "energy"}, {"profile", a.profile}, {"classes", a.classes}, {"rows", rows}}.dump(2) + "\n");
  std::cout << summary.str();
  return 0;
}

// ---- gen-data ----------------------------------------------------------

struct GenArgs {
  std::string dataset = "b";
  std::size_t n = 0;  // 0: the dataset's default size
  std::size_t steps = 128;
  std::uint64_t seed = 0;
};

Tensor index_tensor(const std::vector<std::size_t>& idx) {
  Tensor t(Shape{idx.size()});
  for (std::size_t i = 0; i < idx.size(); ++i) t[i] = static_cast<double>(idx[i]);
  return t;
}

int cmd_gen_data(const GenArgs& a, Run& run) {
  Dataset d;
  std::size_t n = a.n;
  if (a.dataset == "a") {
    n = n ? n : 11000;
    d = gen_dataset_a(n, a.seed, a.steps);
  } else if (a.dataset == "b") {
    d = gen_dataset_b(a.seed, a.steps);
  } else if (a.dataset == "pixel") {
    d = gen_pixel_dataset(n ? n : 640, a.seed);
  } else if (a.dataset == "autoregression") {
    d = gen_autoregression(n ? n : 64, a.steps, a.seed);
  } else {
    throw DomainError("unknown dataset '" + a.dataset + "'");
  }
  run.seed = a.seed;
  run.config = {{"dataset", a.dataset}, {"n", n}, {"steps", a.steps}};
  NamedTensors tensors{{"inputs", d.inputs}, {"train", index_tensor(d.train)}, {"test", index_tensor(d.test)}};
  if (!d.labels.empty()) {
    Tensor labels(Shape{d.labels.size()});
    for (std::size_t i = 0; i < d.labels.size(); ++i) labels[i] = d.labels[i];
    tensors.emplace_back("labels", labels);
  }
  run.write("data.spkn", encode_tensors(tensors));
  const Json j{{"task", "gen-data"},
               {"dataset", a.dataset},
               {"seed", a.seed},
               {"samples", d.size()},
               {"shape", std::vector<std::size_t>(d.inputs.shape().extents().begin(), d.inputs.shape().extents().end())},
               {"train", d.train.size()},
               {"test", d.test.size()}};
  run.write("data.json", j.dump(2) + "\n");
  std::cout << "wrote " << d.size() << " sequences\n";
  return 0;
}

// ---- pixel -------------------------------------------------------------

struct PixelArgs {
  std::string neuron = "dsn";
  PixelConfig cfg;
};

int cmd_pixel(const PixelArgs& a, Run& run) {
  run.seed = a.cfg.train.seed;
  run.config = {{"neuron", a.neuron}, {"samples", a.cfg.samples}, {"hidden", a.cfg.hidden},
                {"epochs", a.cfg.train.epochs}, {"batch", a.cfg.train.batch_size}, {"peak_lr", a.cfg.train.peak_lr}};
  const PixelResult r = run_pixel_task(parse_neuron_kind(a.neuron), a.cfg);
  run.write("pixel.json", to_json(r, a.cfg.train.seed) + "\n");
  std::cout << r.neuron << " accuracy " << r.accuracy << " (untrained " << r.untrained_accuracy << ")\n";
  return 0;
}

int dispatch(const std::vector<std::string>& args);

// ---- rerun -------------------------------------------------------------

int cmd_rerun(const std::string& manifest_path, const std::string& out, bool check) {
  const fs::path src = fs::path(manifest_path);
  const Json m = Json::parse(read_file(src));
  std::vector<std::string> args = m.at("argv").get<std::vector<std::string>>();
  args.push_back("--out");
  args.push_back(out);
  const int rc = dispatch(args);
  if (!check) return rc;
  bool same = rc == m.at("exit_code").get<int>();
  if (!same) std::cerr << "exit code " << rc << " differs from recorded " << m.at("exit_code") << "\n";
  for (const Json& o : m.at("outputs")) {
    if (!o.at("deterministic").get<bool>()) continue;
    const std::string name = o.at("path");
    const bool equal = read_file(src.parent_path() / name) == read_file(fs::path(out) / name);
    std::cout << (equal ? "identical " : "DIFFERS   ") << name << "\n";
    same = same && equal;
  }
  return same ? 0 : code(ErrorCode::kExpectationFailed);
}

// Parses args (without the program name) and runs one command.
int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"spikescan: dynamic-decay spiking neuron toolkit"};
  app.require_subcommand(1);
  std::string out;

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "time forward and backward passes against sequence length");
  b->add_option("--neurons", bench.neurons, "comma list of dsn, lif, psn, sliding-psn")->capture_default_str();
  b->add_option("--lengths", bench.lengths, "ascending comma list")->capture_default_str();
  b->add_option("--batch", bench.cfg.batch)->capture_default_str();
  b->add_option("--channels", bench.cfg.channels)->capture_default_str();
  b->add_option("--reps", bench.cfg.reps)->capture_default_str();
  b->add_option("--warmup", bench.cfg.warmup)->capture_default_str();
  b->add_option("--seed", bench.cfg.seed)->capture_default_str();

  PropsArgs props;
  auto* p = app.add_subcommand("props", "check a reset property or a conditions-table row");
  p->add_option("--neuron", props.neuron, "subject or neuron name")->required();
  p->add_option("--property", props.property, "short-control, long-control, conditions-table or lemma")
      ->capture_default_str();
  p->add_option("--delta", props.delta)->capture_default_str();
  p->add_option("--trials", props.trials)->capture_default_str();
  p->add_option("--seed", props.seed)->capture_default_str();
  p->add_option("--c-bound", props.c_bound, "input bound for long control (default 2 v_th)");
  p->add_option("--steps", props.steps, "length of each random long-control trial")->capture_default_str();
  p->add_option("--horizon", props.horizon, "steps of the constant-input run")->capture_default_str();

  ApproxArgs approx;
  auto* ap = app.add_subcommand("approx", "fit the dynamic-decay bank to LIF targets");
  ap->add_option("--dataset", approx.dataset, "a or b")->capture_default_str();
  ap->add_option("--scale", approx.scale, "desk or full")->capture_default_str();
  ap->add_option("--epochs", approx.epochs, "default 30 (desk) or 100 (full)");
  ap->add_flag("--integer", approx.integer, "integer spikes on the soft-reset channels");
  ap->add_option("--batch", approx.batch)->capture_default_str();
  ap->add_option("--lr", approx.lr)->capture_default_str();
  ap->add_option("--seed", approx.seed)->capture_default_str();

  ExtrapolateArgs extra;
  auto* ex = app.add_subcommand("extrapolate", "train at one length, evaluate serially at others");
  ex->add_option("--neuron", extra.neuron)->capture_default_str();
  ex->add_option("--train-t", extra.train_t)->capture_default_str();
  ex->add_option("--eval-t", extra.eval_t, "comma list")->capture_default_str();
  ex->add_option("--epochs", extra.epochs)->capture_default_str();
  ex->add_option("--seed", extra.seed)->capture_default_str();

  EnergyArgs energy;
  auto* en = app.add_subcommand("energy", "energy of the S-CIFAR network from firing rates");
  en->add_option("--neurons", energy.neurons, "comma list of lif, psn, sliding-psn, dsn")->capture_default_str();
  en->add_option("--classes", energy.classes, "10 or 100")->capture_default_str();
  en->add_option("--steps", energy.steps)->capture_default_str();
  en->add_option("--profile", energy.profile, "literal or reconciled")->capture_default_str();
  en->add_option("--rates", energy.rates, "comma list of seven spike-input layer rates");

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "write a synthetic dataset in SPKN1");
  g->add_option("--dataset", gen.dataset, "a, b, pixel or autoregression")->capture_default_str();
  g->add_option("--n", gen.n, "samples (ignored for b)");
  g->add_option("--steps", gen.steps)->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();

  PixelArgs pixel;
  auto* px = app.add_subcommand("pixel", "train the small conv stack on procedural images");
  px->add_option("--neuron", pixel.neuron)->capture_default_str();
  px->add_option("--samples", pixel.cfg.samples)->capture_default_str();
  px->add_option("--epochs", pixel.cfg.train.epochs)->capture_default_str();
  px->add_option("--seed", pixel.cfg.train.seed)->capture_default_str();

  std::string manifest;
  bool check = false;
  auto* re = app.add_subcommand("rerun", "replay a manifest into a new directory");
  re->add_option("manifest", manifest)->required();
  re->add_flag("--check", check, "compare deterministic outputs with the originals");

  for (auto* sub : {b, p, ap, ex, en, g, px, re}) sub->add_option("--out", out, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ErrorCode::kUsage);
  }

  if (re->parsed()) return cmd_rerun(manifest, out, check);

  // The recorded argv omits --out so a rerun can redirect it.
  std::vector<std::string> recorded;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    recorded.push_back(args[i]);
  }
  CLI::App* sub = app.get_subcommands().front();
  Run run(sub->get_name(), recorded, out);
  int rc = 0;
  try {
    if (sub == b) rc = cmd_bench(bench, run);
    if (sub == p) rc = cmd_props(props, run);
    if (sub == ap) rc = cmd_approx(approx, run);
    if (sub == ex) rc = cmd_extrapolate(extra, run);
    if (sub == en) rc = cmd_energy(energy, run);
    if (sub == g) rc = cmd_gen_data(gen, run);
    if (sub == px) rc = cmd_pixel(pixel, run);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    rc = code(e.code());
  }
  run.finish(rc);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("SPIKESCAN_THREADS")) {
    const int n = std::atoi(threads);
    if (n < 1) {
      std::cerr << "SPIKESCAN_THREADS must be a positive integer\n";
      return code(ErrorCode::kUsage);
    }
    omp_set_num_threads(n);
  }
  try {
    return dispatch(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(ErrorCode::kIo);
  }
}
