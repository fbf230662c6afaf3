// Experiment harness: corrupt/split datasets, train and evaluate SPCA and the
// baselines, sweep grids, export eigenfaces and check the MM diagnostics.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spca/spca_all.hpp"

namespace {

using namespace spca;
namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2, kViolation = 3 };

// ---------------------------------------------------------------------------
// key=value config files

std::string trim_copy(std::string_view s) { return std::string(detail::trim(s)); }

/// Removes `--config FILE` from args and appends `--key=value` for every entry
/// of FILE whose flag is not already on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw io_error("cannot open config '" + path + "'");
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim_copy(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw spca::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim_copy(t.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (!given(flag)) args.push_back(flag + "=" + trim_copy(t.substr(eq + 1)));
  }
  return args;
}

// ---------------------------------------------------------------------------
// Shared helpers

/// A PGM class tree, or a matrix CSV whose columns are samples.
ImageDataset load_dataset(const std::string& path) {
  if (fs::is_directory(path)) return load_image_dir(path);
  const Matrix M = load_matrix(path);
  ImageDataset ds;
  ds.pixels = M;
  ds.height = M.rows();
  ds.width = 1;
  ds.class_names = {"all"};
  for (Index j = 0; j < M.cols(); ++j) {
    ds.labels.push_back(0);
    ds.names.push_back("col" + std::to_string(j));
  }
  return ds;
}

std::string dataset_label(const std::string& path) {
  fs::path p(path);
  if (p.has_filename()) return p.stem().string();
  return p.parent_path().filename().string();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  return out;
}

// CSV cell safe version of an error message.
std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

struct FitOptions {
  std::string method = "spca";
  Index k = 1;
  double p = 1.0;
  double eta = 0.1;
  double c = 15.0;
  int outer_iters = 10;
  double inner_tol = 1e-6;
  int inner_max = 50;
  std::string init = "pca";
  std::string renorm = "every";
  std::uint64_t seed = 0;
  bool normalize = true;

  SelfPacedConfig config(Index k_, double p_, double eta_, double c_) const {
    SelfPacedConfig cfg;
    cfg.k = k_;
    cfg.p = p_;
    cfg.eta = eta_;
    cfg.c = c_;
    cfg.outer_iters = outer_iters;
    cfg.inner_tol = inner_tol;
    cfg.inner_max = inner_max;
    cfg.seed = seed;
    cfg.init = init == "random" ? Initialization::random : Initialization::pca;
    cfg.renormalization = renorm == "frozen" ? Renormalization::frozen_after_first : Renormalization::every_iteration;
    return cfg;
  }
  InnerControls controls() const {
    InnerControls ctl;
    ctl.inner_tol = inner_tol;
    ctl.inner_max = inner_max;
    ctl.seed = seed;
    ctl.init = init == "random" ? Initialization::random : Initialization::pca;
    return ctl;
  }
};

void add_solver_options(CLI::App* sub, FitOptions& o) {
  sub->add_option("--outer-iters", o.outer_iters, "Outer (weight) iterations")->check(CLI::PositiveNumber);
  sub->add_option("--inner-tol", o.inner_tol, "Relative tolerance of the projection update");
  sub->add_option("--inner-max", o.inner_max, "Maximum projection updates per outer iteration")->check(CLI::PositiveNumber);
  sub->add_option("--init", o.init, "Starting basis")->check(CLI::IsMember({"pca", "random"}));
  sub->add_option("--renorm", o.renorm, "Fidelity normalization")->check(CLI::IsMember({"every", "frozen"}));
  sub->add_option("--seed", o.seed, "Seed for random initialization");
  sub->add_flag("!--no-normalize", o.normalize, "Skip unit-norm scaling of samples");
}

// Fitted model plus what train writes next to it.
struct Fit {
  ModelFile model;
  TrainingHistory history;
  bool has_fidelity = false;
};

Fit run_method(const DataMatrix& X, const FitOptions& o, Index k, double p, double eta, double c) {
  Fit f;
  f.model.k = k;
  f.model.p = p;
  f.model.eta = eta;
  f.model.c = c;
  if (o.method == "spca") {
    SpcaResult r = fit_spca(X, o.config(k, p, eta, c));
    f.model.U = r.basis.matrix();
    f.model.weights = r.weights.values();
    f.history = std::move(r.history);
    f.has_fidelity = true;
  } else if (o.method == "l2p") {
    const ProjectionUpdate u = run_l2p_rpca(X, k, p, o.controls());
    IterationRecord rec;
    rec.weights = Vector::Ones(X.samples());
    rec.raw_fidelity = fidelity(X, initial_basis(X, k, o.controls().init, o.seed), p).ell;
    rec.fidelity = rec.raw_fidelity;
    rec.objective = rec.raw_fidelity.sum();
    rec.trace_objective = u.trace_objective;
    rec.inner_iterations = u.iterations;
    f.history.records.push_back(std::move(rec));
    f.model.U = u.basis.matrix();
    f.model.weights = Vector::Ones(X.samples());
    f.has_fidelity = true;
  } else {
    const PcaModel m = fit_pca(X, k);
    IterationRecord rec;
    rec.weights = Vector::Ones(X.samples());
    const Matrix centered = X.values().colwise() - m.mean;
    rec.objective = (m.basis.matrix().transpose() * centered).squaredNorm();
    f.history.records.push_back(std::move(rec));
    f.model.U = m.basis.matrix();
    f.model.weights = Vector::Ones(X.samples());
  }
  return f;
}

Matrix prepared(const ImageDataset& ds, bool normalize) { return normalize ? normalize_columns(ds.pixels) : ds.pixels; }

// "-" for hyperparameters the method does not use.
std::string param_cell(const std::string& method, const char* which, double v) {
  const std::string w = which;
  if (method == "pca" && (w == "p" || w == "eta" || w == "c")) return "-";
  if (method == "l2p" && (w == "eta" || w == "c")) return "-";
  return format_double(v);
}

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  std::string data, out;
  double ratio = 0.5;
  std::uint64_t seed = 0;
};

int cmd_split(const SplitArgs& a) {
  const ImageDataset ds = load_image_dir(a.data);
  const Split s = split_per_class(ds, a.ratio, a.seed);
  write_image_dir(s.train, (fs::path(a.out) / "train").string());
  write_image_dir(s.test, (fs::path(a.out) / "test").string());
  std::vector<ManifestRow> rows;
  for (Index j = 0; j < ds.size(); ++j) {
    const auto u = static_cast<std::size_t>(j);
    rows.push_back({ds.names[u], ds.labels[u], static_cast<bool>(s.is_train[u]), false});
  }
  auto out = open_out(fs::path(a.out) / "manifest.csv");
  write_manifest(out, rows);
  std::cout << "split: " << s.train.size() << " train, " << s.test.size() << " test\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// corrupt

struct CorruptArgs {
  std::string data, out, manifest_in, manifest_out;
  double fraction = 0.3;
  double side_ratio = 0.25;
  std::string fill = "black";
  std::uint64_t seed = 0;
};

int cmd_corrupt(const CorruptArgs& a) {
  ImageDataset ds = load_image_dir(a.data);
  OcclusionOptions opt;
  opt.fraction = a.fraction;
  opt.side_ratio = a.side_ratio;
  opt.fill = a.fill == "random" ? OcclusionFill::uniform_random : OcclusionFill::black;
  opt.seed = a.seed;
  ds = occlude(std::move(ds), opt);
  write_image_dir(ds, a.out);

  std::map<std::string, bool> train_flag;
  if (!a.manifest_in.empty()) {
    std::ifstream in(a.manifest_in);
    if (!in) throw io_error("cannot open '" + a.manifest_in + "'");
    for (const auto& r : read_manifest(in, a.manifest_in)) train_flag[r.file] = r.is_train;
  }
  std::vector<ManifestRow> rows;
  Index hit = 0;
  for (Index j = 0; j < ds.size(); ++j) {
    const auto u = static_cast<std::size_t>(j);
    const auto it = train_flag.find(ds.names[u]);
    const bool is_train = a.manifest_in.empty() ? true : (it != train_flag.end() && it->second);
    rows.push_back({ds.names[u], ds.labels[u], is_train, ds.occluded(j)});
    hit += ds.occluded(j) ? 1 : 0;
  }
  auto out = open_out(a.manifest_out.empty() ? fs::path(a.out) / "manifest.csv" : fs::path(a.manifest_out));
  write_manifest(out, rows);
  std::cout << "corrupt: " << hit << " of " << ds.size() << " images occluded\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data, out;
  FitOptions fit;
};

void write_history(const fs::path& dir, const Fit& f) {
  {
    auto out = open_out(dir / "history.csv");
    const Index n = f.model.weights.size();
    out << "iter,objective,inner_steps";
    for (Index i = 0; i < n; ++i) out << ",w_" << i;
    out << '\n';
    for (std::size_t t = 0; t < f.history.records.size(); ++t) {
      const auto& r = f.history.records[t];
      out << t + 1 << ',' << format_double(r.objective) << ',' << r.inner_iterations;
      for (Index i = 0; i < r.weights.size(); ++i) out << ',' << format_double(r.weights[i]);
      out << '\n';
    }
  }
  if (!f.has_fidelity) return;
  {
    auto out = open_out(dir / "fidelity.csv");
    out << "iter";
    for (Index i = 0; i < f.model.weights.size(); ++i) out << ",l_" << i;
    out << '\n';
    for (std::size_t t = 0; t < f.history.records.size(); ++t) {
      out << t + 1;
      for (Index i = 0; i < f.history.records[t].fidelity.size(); ++i) out << ',' << format_double(f.history.records[t].fidelity[i]);
      out << '\n';
    }
  }
  auto out = open_out(dir / "trace.csv");
  out << "iter,step,trace\n";
  for (std::size_t t = 0; t < f.history.records.size(); ++t) {
    const auto& tr = f.history.records[t].trace_objective;
    for (std::size_t s = 0; s < tr.size(); ++s) out << t + 1 << ',' << s << ',' << format_double(tr[s]) << '\n';
  }
}

int cmd_train(const TrainArgs& a) {
  const ImageDataset ds = load_dataset(a.data);
  const DataMatrix X(prepared(ds, a.fit.normalize));
  const FitOptions& o = a.fit;
  const Fit f = run_method(X, o, o.k, o.p, o.eta, o.c);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  save_model((dir / "model.txt").string(), f.model);
  write_history(dir, f);
  std::cout << "train: " << o.method << " k=" << o.k << " on " << X.dim() << "x" << X.samples() << ", "
            << f.history.size() << " iteration(s)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model, data, out = "error.csv", method = "spca", dataset;
  bool normalize = true;
};

int cmd_eval(const EvalArgs& a) {
  const ModelFile m = load_model(a.model);
  const ImageDataset ds = load_dataset(a.data);
  const double err = reconstruction_error(prepared(ds, a.normalize), ProjectionBasis(m.U));
  auto out = open_out(a.out);
  out << "dataset,method,p,eta,c,k,error\n";
  out << (a.dataset.empty() ? dataset_label(a.data) : a.dataset) << ',' << a.method << ','
      << param_cell(a.method, "p", m.p) << ',' << param_cell(a.method, "eta", m.eta) << ','
      << param_cell(a.method, "c", m.c) << ',' << m.k << ',' << format_double(err) << '\n';
  std::cout << "eval: error " << format_double(err) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string train, test, out, dataset;
  long long synthetic = -1;
  std::vector<std::string> methods{"spca", "l2p"};
  std::vector<Index> ks{10, 15, 20, 25, 30, 35, 40, 45, 50};
  std::vector<double> ps{1.0};
  std::vector<double> etas{0.1};
  std::vector<double> cs{15.0};
  FitOptions fit;
};

struct SweepRow {
  std::string key;  // dataset,method,p,eta,c,k
  std::string error;
  std::string status;
};

constexpr const char* kSweepHeader = "dataset,method,p,eta,c,k,error,status";

std::vector<SweepRow> read_sweep(const std::string& path) {
  std::vector<SweepRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (trim_copy(line) != kSweepHeader) throw io_error(path + ": not a sweep file (unexpected header)");
  while (detail::next_line(in, line)) {
    const auto cells = detail::split(line, ',');
    if (cells.size() != 8) throw io_error(path + ": malformed row '" + line + "'");
    std::string key;
    for (int i = 0; i < 6; ++i) key += (i ? "," : "") + std::string(cells[static_cast<std::size_t>(i)]);
    rows.push_back({key, std::string(cells[6]), std::string(cells[7])});
  }
  return rows;
}

void write_sweep(const std::string& path, const std::vector<SweepRow>& rows) {
  const std::string tmp = path + ".tmp";
  {
    auto out = open_out(tmp);
    out << kSweepHeader << '\n';
    for (const auto& r : rows) out << r.key << ',' << r.error << ',' << r.status << '\n';
  }
  fs::rename(tmp, path);
}

int cmd_sweep(const SweepArgs& a) {
  ImageDataset train, test;
  std::string label = a.dataset;
  if (a.synthetic >= 0) {
    BenchmarkData b = synthetic_benchmark(static_cast<std::uint64_t>(a.synthetic));
    train = std::move(b.train);
    test = std::move(b.test);
    if (label.empty()) label = "synthetic" + std::to_string(a.synthetic);
  } else {
    if (a.train.empty() || a.test.empty()) throw spca::invalid_argument("sweep: give --train and --test, or --synthetic");
    train = load_dataset(a.train);
    test = load_dataset(a.test);
    if (a.fit.normalize) {
      train.pixels = normalize_columns(train.pixels);
      test.pixels = normalize_columns(test.pixels);
    }
    if (label.empty()) label = dataset_label(a.train);
  }
  const DataMatrix X(train.pixels);

  struct Job {
    std::string method;
    Index k;
    double p, eta, c;
    std::string key;
  };
  std::vector<Job> grid;
  for (const auto& method : a.methods) {
    if (method != "spca" && method != "l2p" && method != "pca") throw spca::invalid_argument("sweep: unknown method '" + method + "'");
    for (double p : a.ps)
      for (double eta : a.etas)
        for (double c : a.cs)
          for (Index k : a.ks) {
            const std::string key = label + "," + method + "," + param_cell(method, "p", p) + "," +
                                    param_cell(method, "eta", eta) + "," + param_cell(method, "c", c) + "," +
                                    std::to_string(k);
            if (std::none_of(grid.begin(), grid.end(), [&](const Job& j) { return j.key == key; }))
              grid.push_back({method, k, p, eta, c, key});
          }
  }

  std::map<std::string, SweepRow> done;
  std::vector<SweepRow> foreign;  // rows outside this grid are kept verbatim
  for (auto& r : read_sweep(a.out)) {
    const bool in_grid = std::any_of(grid.begin(), grid.end(), [&](const Job& j) { return j.key == r.key; });
    if (!in_grid) foreign.push_back(r);
    else if (r.status == "ok") done[r.key] = r;
  }

  auto flush = [&] {
    std::vector<SweepRow> rows;
    for (const auto& j : grid)
      if (auto it = done.find(j.key); it != done.end()) rows.push_back(it->second);
    rows.insert(rows.end(), foreign.begin(), foreign.end());
    write_sweep(a.out, rows);
  };

  int computed = 0, failed = 0;
  for (const auto& j : grid) {
    if (done.count(j.key)) continue;
    FitOptions o = a.fit;
    o.method = j.method;
    SweepRow row{j.key, "nan", "ok"};
    try {
      const Fit f = run_method(X, o, j.k, j.p, j.eta, j.c);
      row.error = format_double(reconstruction_error(test.pixels, ProjectionBasis(f.model.U)));
    } catch (const std::exception& e) {
      row.status = "error: " + csv_safe(e.what());
      ++failed;
    }
    done[j.key] = row;
    ++computed;
    flush();
  }
  if (computed == 0) flush();
  std::cout << "sweep: " << grid.size() << " rows, " << computed << " computed, " << failed << " failed\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// export

struct ExportArgs {
  std::string model, data, out;
  Index height = 0, width = 0;
  int count = 5;
  bool normalize = true;
};

std::string numbered(const char* stem, Index i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03ld.pgm", stem, static_cast<long>(i));
  return buf;
}

int cmd_export(const ExportArgs& a) {
  const ModelFile m = load_model(a.model);
  const ProjectionBasis U(m.U);
  Index h = a.height, w = a.width;
  ImageDataset ds;
  if (!a.data.empty()) {
    ds = load_dataset(a.data);
    if (h == 0 && w == 0) {
      h = ds.height;
      w = ds.width;
    }
  }
  if (h <= 0 || w <= 0) throw spca::invalid_argument("export: image shape unknown; pass --data or --height/--width");
  if (h * w != U.dim())
    throw spca::invalid_argument("export: model has d=" + std::to_string(U.dim()) + ", image shape is " + std::to_string(h) + "x" + std::to_string(w));

  const fs::path dir(a.out);
  fs::create_directories(dir);
  for (Index c = 0; c < U.rank(); ++c) save_pgm(U.matrix().col(c), h, w, (dir / numbered("eigenface", c)).string());
  if (!a.data.empty()) {
    const Matrix X = prepared(ds, a.normalize);
    const Index count = std::min<Index>(a.count, X.cols());
    for (Index j = 0; j < count; ++j) {
      save_pgm(X.col(j), h, w, (dir / numbered("original", j)).string());
      save_pgm(reconstruct(X.col(j), U), h, w, (dir / numbered("recon", j)).string());
    }
  }
  std::cout << "export: " << U.rank() << " eigenface(s) to " << dir.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  std::string run, out;
  double eta = std::numeric_limits<double>::quiet_NaN();
  int steps = kDefaultQuadratureSteps;
  bool assert_outer = false;
  bool report_only = false;
  std::vector<double> curve_etas{0.05, 0.1, 0.2, 0.5, 1.0};
  double curve_max = 30.0;
  int curve_points = 301;
};

// Rebuilds the fidelity and trace parts of a training history.
TrainingHistory read_history(const fs::path& dir) {
  const fs::path fid = dir / "fidelity.csv", tr = dir / "trace.csv";
  if (!fs::exists(fid) || !fs::exists(tr)) throw io_error("'" + dir.string() + "': missing fidelity.csv or trace.csv");
  TrainingHistory h;
  std::ifstream in(fid);
  std::string line;
  std::getline(in, line);
  while (detail::next_line(in, line)) {
    const auto cells = detail::split(line, ',');
    IterationRecord r;
    r.fidelity.resize(static_cast<Index>(cells.size()) - 1);
    for (std::size_t i = 1; i < cells.size(); ++i) r.fidelity[static_cast<Index>(i - 1)] = detail::parse_double(cells[i], fid.string());
    h.records.push_back(std::move(r));
  }
  std::ifstream tin(tr);
  std::getline(tin, line);
  while (detail::next_line(tin, line)) {
    const auto cells = detail::split(line, ',');
    if (cells.size() != 3) throw io_error(tr.string() + ": malformed row '" + line + "'");
    const auto iter = detail::parse_int(cells[0], tr.string());
    if (iter < 1 || iter > static_cast<long long>(h.records.size())) throw io_error(tr.string() + ": iteration out of range");
    h.records[static_cast<std::size_t>(iter - 1)].trace_objective.push_back(detail::parse_double(cells[2], tr.string()));
  }
  if (h.empty()) throw io_error("'" + dir.string() + "': empty history");
  return h;
}

int cmd_diagnose(const DiagnoseArgs& a) {
  const fs::path dir(a.run);
  const fs::path out_dir = a.out.empty() ? dir : fs::path(a.out);
  double eta = a.eta;
  if (std::isnan(eta)) {
    if (!fs::exists(dir / "model.txt")) throw spca::invalid_argument("diagnose: no model.txt in run directory; pass --eta");
    eta = load_model((dir / "model.txt").string()).eta;
  }
  const TrainingHistory h = read_history(dir);
  const MonotonicityReport mono = check_mm_monotonicity(h, eta, a.steps);

  {
    auto out = open_out(out_dir / "monotonicity.csv");
    out << "iter,objective,delta,violation\n";
    for (const auto& r : mono.rows)
      out << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.delta) << ',' << (r.violation ? 1 : 0) << '\n';
  }
  {
    auto out = open_out(out_dir / "trace_violations.csv");
    out << "iter,step,drop\n";
    for (const auto& v : mono.inner_violations) out << v.iter << ',' << v.step << ',' << format_double(v.drop) << '\n';
  }

  // Tangent at the previous iterate's fidelities must stay below F.
  std::size_t minorant_bad = 0;
  {
    auto out = open_out(out_dir / "minorant.csv");
    out << "iter,min_gap,violations\n";
    for (std::size_t t = 1; t < h.records.size(); ++t) {
      const Vector& cur = h.records[t].fidelity;
      const Vector& prev = h.records[t - 1].fidelity;
      double min_gap = std::numeric_limits<double>::infinity();
      std::size_t bad = 0;
      for (Index i = 0; i < std::min(cur.size(), prev.size()); ++i) {
        const double gap = surrogate_F(cur[i], eta, a.steps) - surrogate_Q(cur[i], prev[i], eta, a.steps);
        min_gap = std::min(min_gap, gap);
        bad += gap < -1e-8 ? 1 : 0;
      }
      minorant_bad += bad;
      out << t + 1 << ',' << format_double(min_gap) << ',' << bad << '\n';
    }
  }

  std::size_t robust_bad = 0;
  {
    auto out = open_out(out_dir / "robustness.csv");
    out << "iter,M,lipschitz,min_slack,pairs,violations\n";
    for (std::size_t t = 0; t < h.records.size(); ++t) {
      const Vector& f = h.records[t].fidelity;
      const std::vector<double> ells(f.data(), f.data() + f.size());
      const double M = std::nextafter(f.maxCoeff(), std::numeric_limits<double>::infinity());
      const RobustnessReport r = check_robustness_bound(ells, eta, M, a.steps);
      robust_bad += r.violations;
      out << t + 1 << ',' << format_double(M) << ',' << format_double(r.lipschitz) << ','
          << format_double(r.pairs ? r.min_slack : 0.0) << ',' << r.pairs << ',' << r.violations << '\n';
    }
  }

  {
    std::vector<double> ells;
    const int pts = std::max(a.curve_points, 2);
    for (int i = 0; i < pts; ++i) ells.push_back(a.curve_max * i / (pts - 1));
    auto out = open_out(out_dir / "weight_curve.csv");
    out << "eta,ell,w,threshold\n";
    for (const auto& r : weight_curve(a.curve_etas, ells))
      out << format_double(r.eta) << ',' << format_double(r.ell) << ',' << format_double(r.w) << ','
          << format_double(r.threshold) << '\n';
  }

  const bool outer_bad = !mono.outer_monotone();
  std::cout << "diagnose: " << h.size() << " iteration(s); outer decreases " << (outer_bad ? "present" : "none")
            << (a.assert_outer ? "" : " (not asserted)") << "; inner trace violations " << mono.inner_violations.size()
            << "; minorant violations " << minorant_bad << "; robustness violations " << robust_bad << '\n';
  if (a.report_only) return kOk;
  const bool fail = !mono.inner_monotone() || minorant_bad > 0 || robust_bad > 0 || (a.assert_outer && outer_bad);
  return fail ? kViolation : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-paced PCA experiment harness"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.add_option("--config", "key=value file; command-line flags take precedence");

  SplitArgs split_args;
  auto* split = app.add_subcommand("split", "Per-class train/test split of a PGM tree");
  split->add_option("--data", split_args.data, "Input class tree")->required();
  split->add_option("--out", split_args.out, "Output directory (train/, test/, manifest.csv)")->required();
  split->add_option("--train-ratio,--ratio", split_args.ratio, "Fraction of each class used for training")->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", split_args.seed, "Split seed");

  CorruptArgs corrupt_args;
  auto* corrupt = app.add_subcommand("corrupt", "Occlude a random fraction of images with a square block");
  corrupt->add_option("--data", corrupt_args.data, "Input class tree")->required();
  corrupt->add_option("--out", corrupt_args.out, "Output class tree")->required();
  corrupt->add_option("--fraction", corrupt_args.fraction, "Fraction of images to occlude")->check(CLI::Range(0.0, 1.0));
  corrupt->add_option("--side-ratio", corrupt_args.side_ratio, "Block side relative to image side");
  corrupt->add_option("--fill", corrupt_args.fill, "Block fill")->check(CLI::IsMember({"black", "random"}));
  corrupt->add_option("--seed", corrupt_args.seed, "Corruption seed");
  corrupt->add_option("--manifest", corrupt_args.manifest_in, "Split manifest whose is_train column is carried over");
  corrupt->add_option("--manifest-out", corrupt_args.manifest_out, "Manifest path (default <out>/manifest.csv)");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Fit a projection and write model.txt plus history CSVs");
  train->add_option("--data", train_args.data, "PGM class tree or matrix CSV")->required();
  train->add_option("--out", train_args.out, "Run directory")->required();
  train->add_option("--method", train_args.fit.method, "Method")->check(CLI::IsMember({"spca", "l2p", "pca"}));
  train->add_option("--k", train_args.fit.k, "Subspace dimension")->check(CLI::PositiveNumber);
  train->add_option("--p", train_args.fit.p, "Exponent of the pairwise distance");
  train->add_option("--eta", train_args.fit.eta, "Age parameter");
  train->add_option("--c", train_args.fit.c, "Normalizing coefficient for fidelities");
  add_solver_options(train, train_args.fit);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Average reconstruction error of a model on clean data");
  eval->add_option("--model", eval_args.model, "model.txt")->required();
  eval->add_option("--data", eval_args.data, "PGM class tree or matrix CSV")->required();
  eval->add_option("--out", eval_args.out, "Output CSV");
  eval->add_option("--method", eval_args.method, "Method label for the row")->check(CLI::IsMember({"spca", "l2p", "pca"}));
  eval->add_option("--dataset", eval_args.dataset, "Dataset label (default: data path stem)");
  eval->add_flag("!--no-normalize", eval_args.normalize, "Skip unit-norm scaling of samples");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Cross-product grid of fits, one error row per configuration");
  sweep->add_option("--train", sweep_args.train, "Training data");
  sweep->add_option("--test", sweep_args.test, "Clean test data");
  sweep->add_option("--synthetic", sweep_args.synthetic, "Use the synthetic occlusion benchmark with this seed");
  sweep->add_option("--out", sweep_args.out, "Output CSV (resumed if present)")->required();
  sweep->add_option("--dataset", sweep_args.dataset, "Dataset label");
  sweep->add_option("--methods", sweep_args.methods, "Methods")->delimiter(',');
  sweep->add_option("--k", sweep_args.ks, "Subspace dimensions")->delimiter(',');
  sweep->add_option("--p", sweep_args.ps, "Exponents")->delimiter(',');
  sweep->add_option("--eta", sweep_args.etas, "Age parameters")->delimiter(',');
  sweep->add_option("--c", sweep_args.cs, "Normalizing coefficients")->delimiter(',');
  add_solver_options(sweep, sweep_args.fit);

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export", "Write eigenfaces and reconstructions as PGM");
  exp->add_option("--model", export_args.model, "model.txt")->required();
  exp->add_option("--data", export_args.data, "Images to reconstruct");
  exp->add_option("--out", export_args.out, "Output directory")->required();
  exp->add_option("--height", export_args.height, "Image height when --data is absent");
  exp->add_option("--width", export_args.width, "Image width when --data is absent");
  exp->add_option("--count", export_args.count, "Number of reconstructions")->check(CLI::NonNegativeNumber);
  exp->add_flag("!--no-normalize", export_args.normalize, "Skip unit-norm scaling of samples");

  DiagnoseArgs diag_args;
  auto* diag = app.add_subcommand("diagnose", "Ascent, minorant and robustness checks on a training run");
  diag->add_option("--run", diag_args.run, "Run directory written by train")->required();
  diag->add_option("--out", diag_args.out, "Report directory (default: the run directory)");
  diag->add_option("--eta", diag_args.eta, "Age parameter (default: from model.txt)");
  diag->add_option("--steps", diag_args.steps, "Quadrature subintervals");
  diag->add_flag("--assert-outer", diag_args.assert_outer, "Also fail on decreases of sum F(l)");
  diag->add_flag("--report-only", diag_args.report_only, "Never exit with a violation code");
  diag->add_option("--curve-eta", diag_args.curve_etas, "Age parameters for weight_curve.csv")->delimiter(',');
  diag->add_option("--curve-max", diag_args.curve_max, "Largest fidelity in weight_curve.csv");
  diag->add_option("--curve-points", diag_args.curve_points, "Points per curve");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }

  try {
    if (*split) return cmd_split(split_args);
    if (*corrupt) return cmd_corrupt(corrupt_args);
    if (*train) return cmd_train(train_args);
    if (*eval) return cmd_eval(eval_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*exp) return cmd_export(export_args);
    if (*diag) return cmd_diagnose(diag_args);
  } catch (const spca::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
