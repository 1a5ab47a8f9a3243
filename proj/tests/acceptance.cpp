// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number, e.g. `vrturn_acceptance 1 4`.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "labelcases.hpp"
#include "oracles.hpp"
#include "toy.hpp"
#include "vrturn/cli.hpp"
#include "vrturn/dataset.hpp"
#include "vrturn/evaluation.hpp"
#include "vrturn/features.hpp"
#include "vrturn/geometry.hpp"
#include "vrturn/models.hpp"
#include "vrturn/parallel.hpp"
#include "vrturn/pipeline_config.hpp"
#include "vrturn/speech.hpp"
#include "vrturn/synth.hpp"

using namespace vrturn;
namespace fs = std::filesystem;

namespace {

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1 -------------------------------------------------------------------------

void labeling_oracle(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t n = 0, transitions = 0;
  for (const auto& sc : labelcases::scenarios()) {
    const auto labels = label_session(labelcases::recording(sc));
    const std::string err = labelcases::check(sc, labels);
    o.require(err.empty(), err);
    ++n;
    transitions += labels.transitions.size();
  }
  const double dt = seconds_since(t0);
  o.require(dt < 1.0, "runtime");
  o.detail << n << " scenarios, " << transitions << " transitions, " << dt << " s";
}

// 2 -------------------------------------------------------------------------

// Uniform sampling over the overlap of the two bounding boxes.
double mc_box(const std::array<oracle::P, 3>& a, const std::array<oracle::P, 3>& b, std::size_t n, Rng& rng) {
  auto box = [](const std::array<oracle::P, 3>& t) {
    std::array<double, 4> r = {t[0].x, t[0].x, t[0].z, t[0].z};
    for (const auto& p : t) r = {std::min(r[0], p.x), std::max(r[1], p.x), std::min(r[2], p.z), std::max(r[3], p.z)};
    return r;
  };
  const auto ba = box(a), bb = box(b);
  const double x0 = std::max(ba[0], bb[0]), x1 = std::min(ba[1], bb[1]);
  const double z0 = std::max(ba[2], bb[2]), z1 = std::min(ba[3], bb[3]);
  if (x1 <= x0 || z1 <= z0) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(x0, x1), z = rng.uniform(z0, z1);
    if (oracle::inside(a, x, z) && oracle::inside(b, x, z)) ++hit;
  }
  return (x1 - x0) * (z1 - z0) * static_cast<double>(hit) / static_cast<double>(n);
}

void geometry_oracle(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t pairs = 100, samples = 2'000'000;
  const double sin104 = std::sin(104.0 * std::numbers::pi / 180.0);
  double worst = 0.0, worst_full = 0.0;
  bool symmetric = true;
  for (double L : kSharedSpaceLengths) {
    const double tri = 0.5 * L * L * sin104;
    // pose pairs with at least a quarter triangle of overlap
    std::vector<std::pair<DevicePose, DevicePose>> poses;
    Rng gen(derive_seed(7, "vss-poses", static_cast<std::uint64_t>(L)));
    while (poses.size() < pairs) {
      DevicePose a{gen.uniform(-2, 2), 1.6, gen.uniform(-2, 2), gen.uniform(-30, 30), gen.uniform(-60, 60),
                   gen.uniform(-179.9, 180)};
      DevicePose b{a.x + gen.uniform(-0.5, 0.5) * L, 1.5, a.z + gen.uniform(-0.5, 0.5) * L, 0.0, gen.uniform(-60, 60),
                   gen.uniform(-179.9, 180)};
      if (visual_shared_space(a, b, L) >= 0.25 * tri) poses.emplace_back(a, b);
    }
    std::vector<double> rel(pairs);
    std::vector<char> sym(pairs);
    parallel_for(pairs, jobs(), [&](std::size_t i) {
      const auto& [a, b] = poses[i];
      Rng rng(derive_seed(11, "vss-mc", i + 1000 * static_cast<std::uint64_t>(L)));
      const double exact = visual_shared_space(a, b, L);
      const double mc = mc_box(oracle::view_triangle(a, L), oracle::view_triangle(b, L), samples, rng);
      rel[i] = std::abs(mc - exact) / exact;
      sym[i] = visual_shared_space(b, a, L) == exact;
    });
    for (std::size_t i = 0; i < pairs; ++i) {
      worst = std::max(worst, rel[i]);
      symmetric = symmetric && sym[i];
    }
    const DevicePose h{0.3, 1.6, -0.2, 5.0, 10.0, 33.0};
    worst_full = std::max(worst_full, std::abs(visual_shared_space(h, h, L) - tri) / tri);
  }
  const double dt = seconds_since(t0);
  o.require(worst <= 0.01, "Monte Carlo agreement");
  o.require(worst_full <= 1e-9, "full overlap");
  o.require(symmetric, "symmetry");
  o.require(dt < 60.0, "runtime");
  o.detail << "3x" << pairs << " pairs at " << samples << " samples, max rel err " << worst << ", full-overlap rel err "
           << worst_full << ", symmetric " << (symmetric ? "yes" : "no") << ", " << dt << " s";
}

// 3 -------------------------------------------------------------------------

void schema_audit(Outcome& o) {
  const auto& schema = turn_taking_schema();
  SynthConfig sc;
  sc.duration = 120;
  sc.seed = 5;
  const auto session = generate_session(sc);
  const auto& rec = session.recording;
  const auto labels = label_session(rec);
  const auto& users = rec.manifest.users;

  Rng rng(99);
  std::vector<bool> all_zero(schema.size(), true);
  std::size_t causal = 0;
  const std::size_t n = 50;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = rng.uniform(2.0, sc.duration - 1.0);
    const std::size_t m = rng.uniform_index(users.size());
    std::size_t r = rng.uniform_index(users.size() - 1);
    if (r >= m) ++r;
    const auto fv = extract_sample(rec, labels.timeline, t, users[m].user_id, users[r].user_id);
    for (std::size_t j = 0; j < fv.values.size(); ++j)
      if (fv.values[j] != 0.0) all_zero[j] = false;
    auto changed = rec;
    for (auto& s : changed.streams)
      for (auto& f : s.frames)
        if (f.timestamp >= t) {
          f.head.y += rng.uniform(-0.3, 0.3);
          f.head.pitch = std::clamp(f.head.pitch + rng.uniform(-20, 20), -89.0, 89.0);
          f.root.x += rng.uniform(-0.5, 0.5);
          f.root.yaw = wrap_degrees(f.root.yaw + rng.uniform(-40, 40));
          f.left_hand.y += rng.uniform(-0.3, 0.3);
          f.volume = rng.uniform01();
        }
    if (extract_sample(changed, labels.timeline, t, users[m].user_id, users[r].user_id).values == fv.values) ++causal;
  }
  std::size_t ego = 0, zero = 0;
  bool expected_only = true;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].group != FeatureGroup::Egocentric) continue;
    ++ego;
    if (!all_zero[j]) continue;
    ++zero;
    const auto& nm = schema[j].name;
    expected_only = expected_only && (nm.find(".head.x.raw.") != std::string::npos ||
                                      nm.find(".head.z.raw.") != std::string::npos ||
                                      nm.find(".head.yaw.raw.") != std::string::npos);
  }
  o.require(ego == 216, "egocentric width");
  o.require(zero == 18 && expected_only, "zero slots");
  o.require(causal == n, "causality");
  o.detail << ego << " egocentric slots, " << zero << " identically zero, " << ego - zero << " non-trivial; causal on "
           << causal << "/" << n << " samples";
}

// 4 -------------------------------------------------------------------------

void auc_oracle(Outcome& o) {
  Rng rng(2024);
  double worst = 0.0;
  const int sets = 1000;
  for (int k = 0; k < sets; ++k) {
    const std::size_t n = 2 + rng.uniform_index(49);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = k % 3 == 0 ? static_cast<double>(rng.uniform_index(5)) : rng.normal();
      y[i] = rng.bernoulli(0.5);
    }
    // both classes present
    const std::size_t i = rng.uniform_index(n);
    y[i] = 1;
    y[(i + 1 + rng.uniform_index(n - 1)) % n] = 0;
    worst = std::max(worst, std::abs(auc_roc(s, y) - oracle::auc_pairs(s, y)));
  }
  o.require(worst <= 1e-12, "pair counting agreement");
  o.detail << sets << " sets, max |diff| " << worst;
}

// 5 -------------------------------------------------------------------------

double rel_error(const Eigen::VectorXd& fd, const Eigen::VectorXd& g) { return (fd - g).norm() / fd.norm(); }

void model_sanity(Outcome& o) {
  Rng rng(5);
  const Eigen::Index n = 80, d = 6, h = 5;
  Eigen::MatrixXd Z(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) Z(i, j) = rng.normal();
    y[i] = rng.bernoulli(0.5);
  }
  const double step = 1e-6;

  Eigen::VectorXd w(d);
  for (Eigen::Index j = 0; j < d; ++j) w[j] = 0.5 * rng.normal();
  const double b = 0.1;
  Eigen::VectorXd g;
  logistic_objective(w, b, Z, y, 0.5, &g);
  Eigen::VectorXd fd(d + 1);
  for (Eigen::Index j = 0; j <= d; ++j) {
    Eigen::VectorXd wp = w, wm = w;
    double bp = b, bm = b;
    if (j < d) wp[j] += step, wm[j] -= step;
    else bp += step, bm -= step;
    fd[j] = (logistic_objective(wp, bp, Z, y, 0.5) - logistic_objective(wm, bm, Z, y, 0.5)) / (2 * step);
  }
  const double lr_err = rel_error(fd, g);

  MlpParams p;
  p.W1 = Eigen::MatrixXd(d, h);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < h; ++j) p.W1(i, j) = 0.4 * rng.normal();
  p.b1 = Eigen::VectorXd::Constant(h, 0.05);
  p.w2 = Eigen::VectorXd::LinSpaced(h, -0.5, 0.5);
  p.b2 = -0.1;
  mlp_objective(p, Z, y, 1e-3, &g);
  const Eigen::VectorXd theta = mlp_pack(p);
  Eigen::VectorXd fdm(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp[k] += step;
    tm[k] -= step;
    fdm[k] = (mlp_objective(mlp_unpack(tp, d, h), Z, y, 1e-3) - mlp_objective(mlp_unpack(tm, d, h), Z, y, 1e-3)) /
             (2 * step);
  }
  const double mlp_err = rel_error(fdm, g);
  o.require(lr_err <= 1e-5, "logistic gradient");
  o.require(mlp_err <= 1e-4, "mlp gradient");

  const auto ds_signal = toy::dataset(600, 8, 3);
  const auto gp = train_gbm(ds_signal.matrix(), ds_signal.label_vector(), ds_signal.schema, GbmConfig{}, 1);
  const auto loss = gbm_staged_log_loss(gp, ds_signal.matrix(), ds_signal.label_vector());
  bool monotone = true;
  for (std::size_t i = 1; i < loss.size(); ++i) monotone = monotone && loss[i] <= loss[i - 1];
  o.require(monotone, "gbm log-loss monotone");

  auto shuffled = toy::dataset(2000, 10, 17, 20);
  Rng sr(18);
  sr.shuffle(shuffled.labels);
  o.detail << "grad rel err logistic " << lr_err << ", mlp " << mlp_err << "; gbm loss " << loss.front() << " -> "
           << loss.back() << " non-increasing; shuffled AUC";
  for (auto fam : {ModelFamily::Logistic, ModelFamily::MLP, ModelFamily::RandomForest, ModelFamily::GradientBoosting}) {
    const auto rep = run_cv(shuffled, ModelConfig::defaults(fam), CvScheme::SessionCV, 9, jobs());
    o.require(std::abs(rep.mean_auc - 0.5) <= 0.05, std::string(to_string(fam)) + " shuffled AUC");
    o.detail << " " << to_string(fam) << "=" << rep.mean_auc;
  }
}

// 6, 7 ----------------------------------------------------------------------

struct Corpus {
  PipelineConfig cfg;
  std::vector<SessionRecording> recordings;
};

Corpus make_corpus(const CueConfig& cues) {
  Corpus c;
  c.cfg.synth.groups = 10;
  c.cfg.synth.sessions_per_group = 2;
  c.cfg.synth.cues = cues;
  CorpusConfig cc = c.cfg.synth;
  cc.seed = c.cfg.stage_seed("synth");
  for (auto& s : generate_corpus(cc, jobs())) c.recordings.push_back(std::move(s.recording));
  return c;
}

LabeledDataset task_dataset(const Corpus& c, Task task) {
  PipelineConfig p = c.cfg;
  p.task = task;
  return build_dataset(task, c.recordings, p.stage_seed("dataset"), p.dataset_config(jobs()));
}

ModelConfig gbm(const PipelineConfig& p) {
  ModelConfig m = ModelConfig::defaults(ModelFamily::GradientBoosting);
  m.seed = p.stage_seed("model");
  return m;
}

const Corpus& medium_corpus() {
  static const Corpus c = make_corpus(CueConfig::medium());
  return c;
}

void synthetic_recovery(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Corpus& c = medium_corpus();
  o.detail << c.recordings.size() << " sessions;";
  double next_session = 0.0;
  for (auto task : {Task::TurnVsContinue, Task::NextSpeaker, Task::Timing}) {
    const auto ds = task_dataset(c, task);
    double session = 0.0, group = 0.0;
    o.detail << " " << to_string(task) << "(n=" << ds.size() << ")";
    for (auto scheme : {CvScheme::SessionCV, CvScheme::GroupCV, CvScheme::WeekCV}) {
      const double auc = run_cv(ds, gbm(c.cfg), scheme, c.cfg.stage_seed("cv"), jobs()).mean_auc;
      o.require(auc >= 0.85, std::string(to_string(task)) + "/" + std::string(to_string(scheme)) + " AUC");
      o.detail << " " << to_string(scheme) << "=" << auc;
      if (scheme == CvScheme::SessionCV) session = auc;
      if (scheme == CvScheme::GroupCV) group = auc;
    }
    o.require(std::abs(group - session) <= 0.05, std::string(to_string(task)) + " group vs session");
    if (task == Task::NextSpeaker) next_session = session;
  }
  const Corpus off = make_corpus(CueConfig::none());
  const double off_auc =
      run_cv(task_dataset(off, Task::NextSpeaker), gbm(off.cfg), CvScheme::SessionCV, off.cfg.stage_seed("cv"), jobs())
          .mean_auc;
  o.require(next_session - off_auc >= 0.15, "cue ablation drop");
  const double dt = seconds_since(t0);
  o.require(dt < 600.0, "runtime");
  o.detail << "; cues off next/session=" << off_auc << " (drop " << next_session - off_auc << "); " << dt << " s";
}

void interpretation_recovery(Outcome& o) {
  const Corpus& c = medium_corpus();
  const auto ds = task_dataset(c, Task::NextSpeaker);
  const auto groups = default_importance_groups();
  const auto table =
      mda(ds, gbm(c.cfg), groups, CvScheme::SessionCV, kDefaultImportanceReps, c.cfg.stage_seed("mda"), jobs());
  auto rank = [&](const std::string& g) { return table.row(g).rank; };
  // injected cue -> the feature group that carries it
  const std::vector<std::pair<std::string, int>> injected = {
      {"head_raise", rank("ego.main.head.position")},
      {"hand_raise", rank("ego.main.left_hand.position")},
      {"nod", rank("ego.main.head.rotation")},
      {"extraversion", rank("traits.main")},
      {"gaze", std::min({rank("dyad.gaze"), rank("group.main.gaze"), rank("group.ref.gaze")})}};
  o.detail << groups.size() << " groups; ranks";
  for (const auto& [cue, r] : injected) {
    o.require(r <= 5, cue + " outside top 5");
    o.detail << " " << cue << "=" << r;
  }
  const double decoy = table.row("ego.ref.right_hand.rotation").mean_delta;
  o.require(std::abs(decoy) <= 0.01, "decoy delta");
  o.detail << "; decoy delta " << decoy;

  const auto model = train_model(ds.matrix(), ds.label_vector(), ds.schema, gbm(c.cfg));
  const auto curve = partial_dependence(model, ds, "ego.main.head.y.vel.mean", kDefaultGridSize, jobs());
  // GBM curves are step functions; dips below 1e-3 in probability count as flat
  double dip = 0.0;
  for (std::size_t i = 1; i < curve.mean_proba.size(); ++i)
    dip = std::max(dip, curve.mean_proba[i - 1] - curve.mean_proba[i]);
  const double rise = curve.mean_proba.back() - curve.mean_proba.front();
  const bool monotone = dip <= 1e-3 && rise > 0.01;
  o.require(monotone, "head-y PD monotone");
  if (!monotone) {
    o.detail << " curve";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) o.detail << " " << curve.grid[i] << ":" << curve.mean_proba[i];
  }
  o.detail << "; head-y PD " << curve.mean_proba.front() << " -> " << curve.mean_proba.back() << " (largest dip "
           << dip << ")";

  const InterpretConfig in;
  const auto& sp = in.surfaces.front();
  const auto surf = partial_dependence_2d(model, ds, sp.feature_a, sp.feature_b, kDefaultGridSize, sp.negate_a,
                                          sp.negate_b, jobs());
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < surf.grid_a.size(); ++i)
    for (std::size_t j = 0; j < surf.grid_b.size(); ++j)
      if (surf.mean_proba[i][j] > surf.mean_proba[bi][bj]) bi = i, bj = j;
  const bool high_high = 2 * bi >= surf.grid_a.size() && 2 * bj >= surf.grid_b.size();
  o.require(high_high, "pitch-speed surface maximum");
  o.detail << "; pitch surface max at up=" << surf.grid_a[bi] << " down=" << surf.grid_b[bj];
}

// 8 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) { return read_text_file(p); }

void determinism(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / "vrturn_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  PipelineConfig cfg;
  cfg.synth.groups = 10;
  cfg.synth.sessions_per_group = 2;
  cfg.synth.duration = 150;
  write_text_file(root / "config.json", cfg.to_json());
  auto run = [&](const std::string& tag, const std::string& j) {
    std::vector<std::string> args = {"vrturn",  "pipeline", "--config", (root / "config.json").string(),
                                     "--data",  (root / tag / "data").string(),
                                     "--out",   (root / tag / "out").string(),
                                     "--jobs",  j};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::cout.setstate(std::ios::failbit);
    const int rc = cli::run(static_cast<int>(argv.size()), argv.data());
    std::cout.clear();
    return rc;
  };
  o.require(run("a", std::to_string(jobs())) == 0, "first run");
  o.require(run("b", "3") == 0, "second run");
  std::size_t files = 0, identical = 0;
  for (const char* sub : {"out/reports", "out/models", "out/datasets", "out/labels", "data"}) {
    const fs::path da = root / "a" / sub;
    if (!fs::exists(da)) {
      o.require(false, std::string("missing ") + sub);
      continue;
    }
    for (const auto& e : fs::recursive_directory_iterator(da)) {
      if (!e.is_regular_file()) continue;
      const fs::path rel = fs::relative(e.path(), da);
      const fs::path pb = root / "b" / sub / rel;
      ++files;
      if (fs::exists(pb) && slurp(e.path()) == slurp(pb)) ++identical;
      else o.require(false, "differs: " + (fs::path(sub) / rel).string());
    }
  }
  o.require(files > 0, "no artifacts");
  o.detail << identical << "/" << files << " artifacts byte-identical across two runs (jobs " << jobs() << " vs 3)";
  fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"labeling oracle", labeling_oracle},
      {"geometry oracles", geometry_oracle},
      {"feature-schema audit", schema_audit},
      {"AUC oracle", auc_oracle},
      {"model sanity", model_sanity},
      {"end-to-end synthetic recovery", synthetic_recovery},
      {"interpretation recovery", interpretation_recovery},
      {"determinism", determinism}};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Outcome o;
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
