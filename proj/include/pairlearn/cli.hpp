#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "pairlearn/common.hpp"
#include "pairlearn/grid.hpp"
#include "pairlearn/holdout.hpp"
#include "pairlearn/io.hpp"
#include "pairlearn/kernels.hpp"
#include "pairlearn/metrics.hpp"
#include "pairlearn/models.hpp"
#include "pairlearn/online.hpp"

namespace pairlearn::cli {

using holdout::Setting;
using io::DatasetBundle;
using kernels::KernelMatrix;
using kernels::LabelMatrix;
using kernels::SpectrumPolicy;
using models::Variant;

struct Args {
  std::string labels;
  std::string instance_kernel;
  std::string task_kernel;
  std::string instance_features;
  std::string task_features;
  std::string model = "ts";
  std::string setting = "A";
  double lambda = 1.0;
  double lambda_d = 1.0;
  double lambda_t = 1.0;
  std::string grid_spec;
  bool joint_grid = true;
  std::string metric = "auto";
  bool rescore_labels = false;
  bool clip_spectrum = false;
  bool oracle = false;
  std::string output;
  std::string format = "json";
  int batch_size = 1000;
  unsigned long long seed = 0;
  std::string params;       // predict: fitted parameter matrix CSV
  std::string predictions;  // loo: optional held-out prediction CSV
  std::string stream = "instances";
};

enum class MetricKind { mse, micro_auc, macro_auc_rows, macro_auc_cols, c_index };

inline const char* metric_name(MetricKind k) {
  switch (k) {
    case MetricKind::mse: return "mse";
    case MetricKind::micro_auc: return "micro-auc";
    case MetricKind::macro_auc_rows: return "macro-auc-rows";
    case MetricKind::macro_auc_cols: return "macro-auc-cols";
    case MetricKind::c_index: return "c-index";
  }
  return "?";
}

inline bool higher_is_better(MetricKind k) { return k != MetricKind::mse; }

namespace detail {

inline Variant parse_variant(const std::string& s) {
  if (s == "it") return Variant::IT;
  if (s == "kk") return Variant::KK;
  if (s == "okkls") return Variant::OKKLS;
  if (s == "ts") return Variant::TS;
  fail(ErrorCode::InvalidArgument, "unknown model '" + s + "' (expected it|kk|okkls|ts)");
}

inline Setting parse_setting(const std::string& s) {
  if (s == "A" || s == "a") return Setting::A;
  if (s == "B" || s == "b") return Setting::B;
  if (s == "C" || s == "c") return Setting::C;
  if (s == "D" || s == "d") return Setting::D;
  fail(ErrorCode::InvalidArgument, "unknown setting '" + s + "' (expected A|B|C|D)");
}

inline bool is_binary(const Matrix& y) {
  for (Index i = 0; i < y.rows(); ++i)
    for (Index j = 0; j < y.cols(); ++j)
      if (y(i, j) != 0.0 && y(i, j) != 1.0) return false;
  return true;
}

inline MetricKind resolve_metric(const std::string& name, Setting setting, bool binary) {
  if (name == "auto") {
    if (!binary) return MetricKind::mse;
    switch (setting) {
      case Setting::A:
      case Setting::D: return MetricKind::micro_auc;
      case Setting::B: return MetricKind::macro_auc_rows;
      case Setting::C: return MetricKind::macro_auc_cols;
    }
  }
  if (name == "mse") return MetricKind::mse;
  if (name == "micro-auc") return MetricKind::micro_auc;
  if (name == "macro-auc-rows") return MetricKind::macro_auc_rows;
  if (name == "macro-auc-cols") return MetricKind::macro_auc_cols;
  if (name == "c-index") return MetricKind::c_index;
  fail(ErrorCode::InvalidArgument, "unknown metric '" + name + "'");
}

/// AUC-family metrics are scored against the original (binary) labels;
/// mse is scored against the labels the model was trained on.
inline double compute_score(MetricKind kind, const Matrix& y_original, const Matrix& y_train,
                            const Matrix& pred, std::ostream& log) {
  switch (kind) {
    case MetricKind::mse:
      return metrics::mse(y_train, pred);
    case MetricKind::micro_auc:
      return metrics::micro_auc(y_original, pred);
    case MetricKind::macro_auc_rows:
    case MetricKind::macro_auc_cols: {
      const auto axis =
          kind == MetricKind::macro_auc_rows ? metrics::Axis::rows : metrics::Axis::cols;
      const auto result = metrics::macro_auc(y_original, pred, axis);
      if (result.skipped_slices > 0)
        log << "warning: " << result.skipped_slices
            << " slice(s) lacked both classes and were skipped\n";
      return result.value;
    }
    case MetricKind::c_index:
      return metrics::c_index(vec(y_original), vec(pred));
  }
  fail(ErrorCode::InvalidArgument, "unknown metric kind");
}

struct LoadedData {
  DatasetBundle bundle;   // original labels, aligned kernels
  LabelMatrix y_train;    // rescored when requested, otherwise the original
  bool binary = false;
};

inline KernelMatrix identity_kernel(const std::vector<std::string>& ids) {
  KernelMatrix k;
  k.ids = ids;
  k.gram = Matrix::Identity(static_cast<Index>(ids.size()), static_cast<Index>(ids.size()));
  return k;
}

/// Rebuild a kernel from its clipped spectrum so every downstream consumer
/// sees a genuinely PSD matrix.
inline KernelMatrix clip_kernel(const KernelMatrix& k) {
  const auto eig = kernels::decompose(k, SpectrumPolicy::clip);
  KernelMatrix out;
  out.ids = k.ids;
  Matrix gram = linalg::reconstruct(eig);
  out.gram = 0.5 * (gram + gram.transpose());
  return out;
}

inline LoadedData load_bundle(const Args& args) {
  require(!args.labels.empty(), ErrorCode::InvalidArgument, "--labels is required");
  LabelMatrix y = io::read_label_csv(args.labels);
  std::vector<io::Provenance> provenance;
  provenance.push_back({args.labels, io::file_checksum(args.labels)});

  KernelMatrix k;
  if (!args.instance_kernel.empty()) {
    k = io::read_kernel_csv(args.instance_kernel);
    provenance.push_back({args.instance_kernel, io::file_checksum(args.instance_kernel)});
  } else if (!args.instance_features.empty()) {
    io::CsvMatrix f = io::read_matrix_csv(args.instance_features, io::MatrixKind::feature);
    k = kernels::gram_linear(f.values, f.row_ids);
    provenance.push_back({args.instance_features, io::file_checksum(args.instance_features)});
  } else {
    fail(ErrorCode::InvalidArgument, "--instance-kernel or --instance-features is required");
  }

  KernelMatrix g;
  if (!args.task_kernel.empty()) {
    g = io::read_kernel_csv(args.task_kernel);
    provenance.push_back({args.task_kernel, io::file_checksum(args.task_kernel)});
  } else if (!args.task_features.empty()) {
    io::CsvMatrix f = io::read_matrix_csv(args.task_features, io::MatrixKind::feature);
    g = kernels::gram_linear(f.values, f.row_ids);
    provenance.push_back({args.task_features, io::file_checksum(args.task_features)});
  } else {
    // No task-side information: fall back to the delta kernel, which makes
    // two-step KRR coincide with independent-task KRR.
    g = identity_kernel(y.task_ids);
  }

  LoadedData data;
  data.bundle = io::align_bundle(std::move(y), k, g);
  data.bundle.provenance = std::move(provenance);
  if (args.clip_spectrum) {
    data.bundle.k = clip_kernel(data.bundle.k);
    data.bundle.g = clip_kernel(data.bundle.g);
  }
  data.binary = is_binary(data.bundle.y.values);
  data.y_train = args.rescore_labels ? kernels::rescore_labels(data.bundle.y) : data.bundle.y;
  return data;
}

inline void check_loo_combination(Variant v, Setting s, bool oracle) {
  switch (v) {
    case Variant::IT:
      require(s == Setting::A || s == Setting::B, ErrorCode::UnsupportedCombination,
              "independent-task LOO exists only for settings A and B");
      return;
    case Variant::KK:
      require(s == Setting::A || oracle, ErrorCode::UnsupportedCombination,
              "Kronecker KRR has a LOO shortcut only for setting A; "
              "pass --oracle for settings B, C, D (small problems only)");
      return;
    case Variant::TS:
      return;
    case Variant::OKKLS:
      fail(ErrorCode::UnsupportedCombination, "LOO is defined for models it, kk and ts");
  }
}

inline Matrix loo_predictions(const models::FitSession& session, Variant variant, Setting setting,
                              double lambda_d, double lambda_t, double lambda, bool oracle) {
  const LabelMatrix& y = session.labels();
  if (oracle)
    return holdout::brute_force_loo(variant, setting, session.instance_kernel(),
                                    session.task_kernel(), y, lambda_d, lambda_t, lambda)
        .predictions;
  switch (variant) {
    case Variant::IT:
      return holdout::loo_it(filters::hat_matrix(session.instance_eig(), lambda_d), y.values,
                             &y.instance_ids)
          .predictions;
    case Variant::KK:
      return holdout::loo_setting_a(filters::FilterSpec::kronecker_tikhonov(lambda),
                                    session.instance_eig(), session.task_eig(), y.values,
                                    &y.instance_ids, &y.task_ids)
          .predictions;
    case Variant::TS: {
      switch (setting) {
        case Setting::A:
          return holdout::loo_setting_a(filters::FilterSpec::two_step(lambda_d, lambda_t),
                                        session.instance_eig(), session.task_eig(), y.values,
                                        &y.instance_ids, &y.task_ids)
              .predictions;
        case Setting::B:
          return holdout::loo_setting_b(filters::hat_matrix(session.instance_eig(), lambda_d),
                                        filters::hat_matrix(session.task_eig(), lambda_t),
                                        y.values, &y.instance_ids)
              .predictions;
        case Setting::C:
          return holdout::loo_setting_c(filters::hat_matrix(session.instance_eig(), lambda_d),
                                        filters::hat_matrix(session.task_eig(), lambda_t),
                                        y.values, &y.task_ids)
              .predictions;
        case Setting::D:
          return holdout::loo_setting_d(filters::hat_matrix(session.instance_eig(), lambda_d),
                                        filters::hat_matrix(session.task_eig(), lambda_t),
                                        y.values, &y.instance_ids, &y.task_ids)
              .predictions;
      }
      break;
    }
    default:
      break;
  }
  fail(ErrorCode::UnsupportedCombination, "unsupported model/setting combination");
}

inline io::GridRecord make_record(Variant v, double lambda_d, double lambda_t, double lambda,
                                  double score) {
  io::GridRecord rec;
  rec.score = score;
  switch (v) {
    case Variant::IT:
      rec.lambda_d = lambda_d;
      break;
    case Variant::KK:
      rec.lambda = lambda;
      break;
    case Variant::OKKLS:
      rec.lambda = 0.0;
      break;
    case Variant::TS:
      rec.lambda_d = lambda_d;
      rec.lambda_t = lambda_t;
      break;
  }
  return rec;
}

inline io::ReportFormat parse_format(const std::string& s) {
  if (s == "json") return io::ReportFormat::json;
  if (s == "csv") return io::ReportFormat::csv;
  fail(ErrorCode::InvalidArgument, "unknown report format '" + s + "' (expected json|csv)");
}

inline std::string sibling_path(const std::string& base, const std::string& suffix) {
  std::filesystem::path p(base);
  p.replace_extension();
  return p.string() + suffix;
}

inline void parallel_for(Index n, unsigned threads, const std::function<void(Index)>& fn) {
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<Index>(n, 1)));
  if (threads <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (Index i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

/// fit: train one model, write the dual parameter matrix as CSV plus a
/// report whose best.score is the in-sample mean squared error.
inline io::Report run_fit(const Args& args, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Variant variant = detail::parse_variant(args.model);
  detail::LoadedData data = detail::load_bundle(args);
  models::FitSession session(data.bundle.k, data.bundle.g, data.y_train);

  models::DualModel model;
  switch (variant) {
    case Variant::IT: model = session.fit_it(args.lambda_d); break;
    case Variant::KK: model = session.fit_kk(args.lambda); break;
    case Variant::OKKLS:
      model = models::fit_okkls(data.bundle.k, data.bundle.g, data.y_train);
      break;
    case Variant::TS: model = session.fit_ts(args.lambda_d, args.lambda_t); break;
  }

  Matrix g_test;
  if (variant == Variant::IT) {
    std::vector<Index> all(static_cast<std::size_t>(data.y_train.tasks()));
    std::iota(all.begin(), all.end(), Index{0});
    g_test = models::selector_rows(all, data.y_train.tasks());
  } else {
    g_test = data.bundle.g.gram;
  }
  const Matrix in_sample = models::predict(model, data.bundle.k.gram, g_test);
  const double training_mse = metrics::mse(data.y_train.values, in_sample);

  const std::string params_path = args.output.empty() ? "pairlearn_model.csv" : args.output;
  io::write_matrix_csv(params_path, model.instance_ids, model.task_ids, model.params);

  io::Report report;
  report.model = models::variant_name(variant);
  report.setting = "A";
  report.metric = "mse";
  report.best = detail::make_record(variant, args.lambda_d, args.lambda_t, args.lambda,
                                    training_mse);
  report.m = static_cast<int>(data.y_train.instances());
  report.q = static_cast<int>(data.y_train.tasks());
  for (const auto& p : data.bundle.provenance) report.provenance.push_back(p.path);
  report.timing_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto format = detail::parse_format(args.format);
  const std::string report_path =
      detail::sibling_path(params_path, format == io::ReportFormat::json ? ".report.json"
                                                                         : ".report.csv");
  io::write_report(report, report_path, format);
  log << "wrote " << params_path << " and " << report_path << " (training mse "
      << training_mse << ")\n";
  return report;
}

/// predict: load a fitted parameter matrix and rectangular test kernel
/// evaluations, write k_test * A * g_test^T.
inline Matrix run_predict(const Args& args, std::ostream& log) {
  require(!args.params.empty(), ErrorCode::InvalidArgument, "--params is required");
  require(!args.instance_kernel.empty() && !args.task_kernel.empty(), ErrorCode::InvalidArgument,
          "predict needs --instance-kernel and --task-kernel test evaluation files");
  const Variant variant = detail::parse_variant(args.model);

  io::CsvMatrix params = io::read_matrix_csv(args.params, io::MatrixKind::label);
  io::CsvMatrix k_test = io::read_matrix_csv(args.instance_kernel, io::MatrixKind::feature);
  io::CsvMatrix g_test = io::read_matrix_csv(args.task_kernel, io::MatrixKind::feature);

  auto reorder = [](io::CsvMatrix& m, const std::vector<std::string>& want, const char* what) {
    std::unordered_map<std::string, Index> pos;
    for (Index i = 0; i < static_cast<Index>(m.col_ids.size()); ++i)
      pos.emplace(m.col_ids[static_cast<std::size_t>(i)], i);
    Matrix out(m.values.rows(), static_cast<Index>(want.size()));
    for (Index j = 0; j < static_cast<Index>(want.size()); ++j) {
      auto it = pos.find(want[static_cast<std::size_t>(j)]);
      require(it != pos.end(), ErrorCode::MissingId,
              std::string(what) + " file is missing column '" +
                  want[static_cast<std::size_t>(j)] + "'");
      out.col(j) = m.values.col(it->second);
    }
    m.values = std::move(out);
    m.col_ids = want;
  };
  reorder(k_test, params.row_ids, "--instance-kernel");
  reorder(g_test, params.col_ids, "--task-kernel");

  models::DualModel model;
  model.variant = variant;
  model.params = params.values;
  model.instance_ids = params.row_ids;
  model.task_ids = params.col_ids;

  const Matrix f = models::predict(model, k_test.values, g_test.values);
  const std::string out_path = args.output.empty() ? "pairlearn_predictions.csv" : args.output;
  io::write_matrix_csv(out_path, k_test.row_ids, g_test.row_ids, f);
  log << "wrote " << out_path << "\n";
  return f;
}

/// loo: exact leave-one-out predictions for the chosen setting, scored with
/// the chosen metric.
inline io::Report run_loo(const Args& args, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Variant variant = detail::parse_variant(args.model);
  const Setting setting = detail::parse_setting(args.setting);
  detail::check_loo_combination(variant, setting, args.oracle);

  detail::LoadedData data = detail::load_bundle(args);
  models::FitSession session(data.bundle.k, data.bundle.g, data.y_train);
  const Matrix pred = detail::loo_predictions(session, variant, setting, args.lambda_d,
                                              args.lambda_t, args.lambda, args.oracle);

  const MetricKind metric = detail::resolve_metric(args.metric, setting, data.binary);
  const double score =
      detail::compute_score(metric, data.bundle.y.values, data.y_train.values, pred, log);

  if (!args.predictions.empty())
    io::write_matrix_csv(args.predictions, data.y_train.instance_ids, data.y_train.task_ids,
                         pred);

  io::Report report;
  report.model = models::variant_name(variant);
  report.setting = holdout::setting_name(setting);
  report.metric = metric_name(metric);
  report.grid.push_back(
      detail::make_record(variant, args.lambda_d, args.lambda_t, args.lambda, score));
  report.best = report.grid.front();
  report.m = static_cast<int>(data.y_train.instances());
  report.q = static_cast<int>(data.y_train.tasks());
  for (const auto& p : data.bundle.provenance) report.provenance.push_back(p.path);
  report.timing_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!args.output.empty())
    io::write_report(report, args.output, detail::parse_format(args.format));
  log << "loo setting " << report.setting << " model " << report.model << " "
      << report.metric << " = " << score << "\n";
  return report;
}

/// grid: evaluate LOO at every grid point, reusing one eigendecomposition per
/// kernel matrix. Ties are broken toward larger regularization.
inline io::Report run_grid(const Args& args, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Variant variant = detail::parse_variant(args.model);
  const Setting setting = detail::parse_setting(args.setting);
  detail::check_loo_combination(variant, setting, args.oracle);
  const GridSpec grid = parse_grid(args.grid_spec);

  detail::LoadedData data = detail::load_bundle(args);
  models::FitSession session(data.bundle.k, data.bundle.g, data.y_train);
  const MetricKind metric = detail::resolve_metric(args.metric, setting, data.binary);

  struct Point {
    double lambda_d = 0, lambda_t = 0, lambda = 0;
  };
  std::vector<Point> points;
  if (variant == Variant::TS) {
    if (args.joint_grid && grid.joint) {
      for (double ld : grid.lambda_values)
        for (double lt : grid.lambda_values) points.push_back({ld, lt, 0.0});
    } else {
      for (double l : grid.lambda_values) points.push_back({l, l, 0.0});
    }
  } else if (variant == Variant::IT) {
    for (double l : grid.lambda_values) points.push_back({l, 0.0, 0.0});
  } else {
    for (double l : grid.lambda_values) points.push_back({0.0, 0.0, l});
  }

  std::vector<io::GridRecord> records(points.size());
  detail::parallel_for(static_cast<Index>(points.size()), thread_cap(), [&](Index i) {
    const Point& p = points[static_cast<std::size_t>(i)];
    const Matrix pred = detail::loo_predictions(session, variant, setting, p.lambda_d,
                                                p.lambda_t, p.lambda, args.oracle);
    std::ostringstream local;
    const double score =
        detail::compute_score(metric, data.bundle.y.values, data.y_train.values, pred, local);
    records[static_cast<std::size_t>(i)] =
        detail::make_record(variant, p.lambda_d, p.lambda_t, p.lambda, score);
  });

  // Records are in ascending (lambda_d, lambda_t) order by construction;
  // >= / <= therefore prefers the larger regularization on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (higher_is_better(metric) ? records[i].score >= records[best].score
                                 : records[i].score <= records[best].score)
      best = i;
  }

  io::Report report;
  report.model = models::variant_name(variant);
  report.setting = holdout::setting_name(setting);
  report.metric = metric_name(metric);
  report.grid = records;
  report.best = records.at(best);
  report.m = static_cast<int>(data.y_train.instances());
  report.q = static_cast<int>(data.y_train.tasks());
  for (const auto& p : data.bundle.provenance) report.provenance.push_back(p.path);
  report.timing_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!args.output.empty())
    io::write_report(report, args.output, detail::parse_format(args.format));
  log << "grid of " << records.size() << " points, best " << report.metric << " = "
      << report.best.score << " in " << report.timing_seconds << "s\n";
  return report;
}

/// online: stream the training split in mini batches through the primal
/// two-step model, scoring a fixed holdout split after each batch and
/// emitting a learning-curve CSV.
inline io::Report run_online(const Args& args, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  require(!args.instance_features.empty() && !args.task_features.empty(),
          ErrorCode::InvalidArgument,
          "online needs --instance-features and --task-features");
  require(args.batch_size >= 1, ErrorCode::InvalidArgument, "--batch-size must be >= 1");
  require(args.lambda_d > 0.0 && args.lambda_t > 0.0, ErrorCode::InvalidArgument,
          "online updates require strictly positive --lambda-d and --lambda-t");
  const bool stream_tasks = args.stream == "tasks";
  require(stream_tasks || args.stream == "instances", ErrorCode::InvalidArgument,
          "--stream must be instances or tasks");
  require(!args.labels.empty(), ErrorCode::InvalidArgument, "--labels is required");

  LabelMatrix y = io::read_label_csv(args.labels);
  io::CsvMatrix phi_csv = io::read_matrix_csv(args.instance_features, io::MatrixKind::feature);
  io::CsvMatrix psi_csv = io::read_matrix_csv(args.task_features, io::MatrixKind::feature);

  auto align_rows = [](const io::CsvMatrix& m, const std::vector<std::string>& want,
                       const char* what) {
    std::unordered_map<std::string, Index> pos;
    for (Index i = 0; i < static_cast<Index>(m.row_ids.size()); ++i)
      pos.emplace(m.row_ids[static_cast<std::size_t>(i)], i);
    Matrix out(static_cast<Index>(want.size()), m.values.cols());
    for (Index i = 0; i < static_cast<Index>(want.size()); ++i) {
      auto it = pos.find(want[static_cast<std::size_t>(i)]);
      require(it != pos.end(), ErrorCode::MissingId,
              std::string(what) + " features missing id '" + want[static_cast<std::size_t>(i)] +
                  "'");
      out.row(i) = m.values.row(it->second);
    }
    return out;
  };
  const Matrix phi = align_rows(phi_csv, y.instance_ids, "instance");
  const Matrix psi = align_rows(psi_csv, y.task_ids, "task");

  const bool binary = detail::is_binary(y.values);
  const Matrix y_train_values =
      args.rescore_labels ? kernels::rescore_labels(y).values : y.values;

  const Index total = stream_tasks ? y.tasks() : y.instances();
  require(total >= 2, ErrorCode::NoTrainingData,
          "online needs at least two units to split into train and holdout");
  const Index n_test = std::max<Index>(1, total / 4);
  const Index n_train = total - n_test;

  std::vector<Index> train_order(static_cast<std::size_t>(n_train));
  std::iota(train_order.begin(), train_order.end(), Index{0});
  if (args.seed != 0) {
    std::mt19937_64 rng(args.seed);
    std::shuffle(train_order.begin(), train_order.end(), rng);
  }

  auto pick_rows = [](const Matrix& m, const std::vector<Index>& idx) {
    Matrix out(static_cast<Index>(idx.size()), m.cols());
    for (Index i = 0; i < out.rows(); ++i) out.row(i) = m.row(idx[static_cast<std::size_t>(i)]);
    return out;
  };
  auto pick_cols = [](const Matrix& m, const std::vector<Index>& idx) {
    Matrix out(m.rows(), static_cast<Index>(idx.size()));
    for (Index j = 0; j < out.cols(); ++j) out.col(j) = m.col(idx[static_cast<std::size_t>(j)]);
    return out;
  };

  // Holdout = the trailing units in file order; training = the rest,
  // optionally shuffled by --seed.
  const MetricKind metric = detail::resolve_metric(
      args.metric, stream_tasks ? Setting::C : Setting::B, binary);

  Matrix phi_test, psi_test, y_test, y_test_train_scale;
  if (stream_tasks) {
    std::vector<Index> test_idx(static_cast<std::size_t>(n_test));
    std::iota(test_idx.begin(), test_idx.end(), n_train);
    psi_test = pick_rows(psi, test_idx);
    y_test = pick_cols(y.values, test_idx);
    y_test_train_scale = pick_cols(y_train_values, test_idx);
  } else {
    std::vector<Index> test_idx(static_cast<std::size_t>(n_test));
    std::iota(test_idx.begin(), test_idx.end(), n_train);
    phi_test = pick_rows(phi, test_idx);
    y_test = pick_rows(y.values, test_idx);
    y_test_train_scale = pick_rows(y_train_values, test_idx);
  }

  std::string curve = "batch,size,score\n";
  std::optional<online::PrimalModel> model;
  double last_score = 0.0;
  int batch_index = 0;
  Index seen = 0;
  for (Index pos = 0; pos < n_train; pos += args.batch_size) {
    const Index l = std::min<Index>(args.batch_size, n_train - pos);
    std::vector<Index> batch(train_order.begin() + pos, train_order.begin() + pos + l);
    if (stream_tasks) {
      const Matrix psi_b = pick_rows(psi, batch);
      const Matrix y_b = pick_cols(y_train_values, batch);
      if (!model)
        model = online::init_primal(phi, psi_b, y_b, args.lambda_d, args.lambda_t);
      else
        model = online::update_tasks(*model, psi_b, y_b);
    } else {
      const Matrix phi_b = pick_rows(phi, batch);
      const Matrix y_b = pick_rows(y_train_values, batch);
      if (!model)
        model = online::init_primal(phi_b, psi, y_b, args.lambda_d, args.lambda_t);
      else
        model = online::update_instances(*model, phi_b, y_b);
    }
    seen += l;
    const Matrix pred = stream_tasks ? online::predict_primal(*model, phi, psi_test)
                                     : online::predict_primal(*model, phi_test, psi);
    std::ostringstream sink;
    last_score = detail::compute_score(metric, y_test, y_test_train_scale, pred, sink);
    ++batch_index;
    curve += std::to_string(batch_index) + "," + std::to_string(seen) + "," +
             io::detail::format_number(last_score) + "\n";
  }

  const std::string report_path = args.output.empty() ? "pairlearn_online.json" : args.output;
  const std::string curve_path = detail::sibling_path(report_path, ".curve.csv");
  io::detail::write_file(curve_path, curve);

  io::Report report;
  report.model = "ts-primal";
  report.setting = stream_tasks ? "C" : "B";
  report.metric = metric_name(metric);
  report.best = detail::make_record(Variant::TS, args.lambda_d, args.lambda_t, 0.0, last_score);
  report.m = static_cast<int>(y.instances());
  report.q = static_cast<int>(y.tasks());
  report.provenance = {args.labels, args.instance_features, args.task_features};
  report.timing_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_report(report, report_path, detail::parse_format(args.format));
  log << "streamed " << batch_index << " batch(es); final " << report.metric << " = "
      << last_score << "; wrote " << curve_path << "\n";
  return report;
}

}  // namespace pairlearn::cli
