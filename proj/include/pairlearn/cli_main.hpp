#pragma once

#include <CLI11.hpp>

#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include "pairlearn/cli.hpp"

namespace pairlearn::cli {

/// Full command-line driver. Returns the process exit code: 0 success,
/// 1 usage error, 2 data error, 3 numeric error.
inline int cli_main(std::vector<std::string> argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"pairlearn - kernel ridge regression for dyadic prediction"};
  app.require_subcommand(1);

  Args args;
  auto add_data_flags = [&](CLI::App* cmd) {
    cmd->add_option("--labels", args.labels, "label matrix CSV (rows instances, cols tasks)");
    cmd->add_option("--instance-kernel", args.instance_kernel, "instance kernel CSV");
    cmd->add_option("--task-kernel", args.task_kernel, "task kernel CSV");
    cmd->add_option("--instance-features", args.instance_features, "instance feature CSV");
    cmd->add_option("--task-features", args.task_features, "task feature CSV");
    cmd->add_flag("--rescore-labels", args.rescore_labels,
                  "rescore binary labels to N/N+ and -N/N-");
    cmd->add_flag("--clip-spectrum", args.clip_spectrum,
                  "clamp negative kernel eigenvalues to zero instead of failing");
    cmd->add_option("--output", args.output, "output path");
    cmd->add_option("--format", args.format, "report format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", args.seed, "random seed");
  };
  auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--model", args.model, "model: it|kk|okkls|ts")
        ->check(CLI::IsMember({"it", "kk", "okkls", "ts"}));
    cmd->add_option("--lambda", args.lambda, "regularization for the Kronecker model");
    cmd->add_option("--lambda-d", args.lambda_d, "instance-side regularization");
    cmd->add_option("--lambda-t", args.lambda_t, "task-side regularization");
  };

  CLI::App* fit = app.add_subcommand("fit", "train a model and write its dual parameters");
  add_data_flags(fit);
  add_model_flags(fit);

  CLI::App* predict =
      app.add_subcommand("predict", "predict from a parameter snapshot and test kernels");
  add_data_flags(predict);
  predict->add_option("--model", args.model, "model: it|kk|okkls|ts")
      ->check(CLI::IsMember({"it", "kk", "okkls", "ts"}));
  predict->add_option("--params", args.params, "fitted parameter matrix CSV")->required();

  CLI::App* loo = app.add_subcommand("loo", "exact leave-one-out evaluation");
  add_data_flags(loo);
  add_model_flags(loo);
  loo->add_option("--setting", args.setting, "prediction setting: A|B|C|D")
      ->check(CLI::IsMember({"A", "B", "C", "D", "a", "b", "c", "d"}));
  loo->add_option("--metric", args.metric,
                  "metric: auto|mse|micro-auc|macro-auc-rows|macro-auc-cols|c-index");
  loo->add_flag("--oracle", args.oracle, "use the brute-force retraining oracle");
  loo->add_option("--predictions", args.predictions, "write held-out predictions to this CSV");

  CLI::App* grid = app.add_subcommand("grid", "hyperparameter grid search over LOO scores");
  add_data_flags(grid);
  add_model_flags(grid);
  grid->add_option("--setting", args.setting, "prediction setting: A|B|C|D")
      ->check(CLI::IsMember({"A", "B", "C", "D", "a", "b", "c", "d"}));
  grid->add_option("--metric", args.metric,
                   "metric: auto|mse|micro-auc|macro-auc-rows|macro-auc-cols|c-index");
  grid->add_option("--grid", args.grid_spec, "grid spec START:END:decade (default 1e-7:1e6)");
  grid->add_flag("--oracle", args.oracle, "use the brute-force retraining oracle");
  grid->add_flag("!--no-joint-grid", args.joint_grid,
                 "restrict two-step search to lambda_d == lambda_t");

  CLI::App* online = app.add_subcommand("online", "mini-batch primal two-step learning");
  add_data_flags(online);
  online->add_option("--lambda-d", args.lambda_d, "instance-side regularization");
  online->add_option("--lambda-t", args.lambda_t, "task-side regularization");
  online->add_option("--batch-size", args.batch_size, "mini-batch size");
  online->add_option("--metric", args.metric, "holdout metric (auto maps to mse)");
  online->add_option("--stream", args.stream, "stream instances or tasks")
      ->check(CLI::IsMember({"instances", "tasks"}));

  std::vector<std::string> cli_order(argv.rbegin(), argv.rend());
  try {
    app.parse(cli_order);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (fit->parsed())
      run_fit(args, out);
    else if (predict->parsed())
      run_predict(args, out);
    else if (loo->parsed())
      run_loo(args, out);
    else if (grid->parsed())
      run_grid(args, out);
    else if (online->parsed())
      run_online(args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.error_class());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

inline int cli_main(int argc, char** argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(std::move(args), out, err);
}

}  // namespace pairlearn::cli
