// knock: command-line front end for the acoustic object recognition pipeline.
//
//   knock synth       generate a synthetic knock corpus (WAV files + manifest)
//   knock train       train sdae / svm-raw / svm-mfcc on the training split
//   knock eval        evaluate a saved model on the test split
//   knock experiment  train + evaluate in one go
//   knock sweep       parameter sweep with repeated seeds
//   knock gradcheck   finite-difference check of backprop on random networks
//   knock predict     classify one WAV file
//   knock features    dump MFCC features as CSV

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "knock/experiment.hpp"
#include "knock/nn.hpp"
#include "knock/wav.hpp"

namespace fs = std::filesystem;
using namespace knock;

namespace {

struct Overrides {
  std::string config;
  std::string method;
  std::string manifest;
  bool fast = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> data_seed;
  std::optional<int> classes;
  std::optional<int> trials;
  std::optional<int> pretrain_epochs;
  std::optional<int> finetune_epochs;
  std::optional<double> pretrain_lr;
  std::optional<double> finetune_lr;
  std::optional<double> corruption;
  std::optional<int> batch;
  std::optional<std::vector<int>> hidden;
  std::optional<int> train_per_class;
  std::optional<int> test_per_class;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "Experiment config (JSON)");
  cmd->add_option("--method", o.method, "sdae | svm-raw | svm-mfcc");
  cmd->add_option("--manifest", o.manifest, "Dataset manifest CSV (path,label)");
  cmd->add_flag("--fast", o.fast, "Small CI profile: 3 classes x 20 trials, 50/100 epochs");
  cmd->add_option("--seed", o.seed, "Training seed");
  cmd->add_option("--data-seed", o.data_seed, "Synthetic corpus seed");
  cmd->add_option("--classes", o.classes, "Synthetic corpus class count");
  cmd->add_option("--trials", o.trials, "Synthetic corpus trials per class");
  cmd->add_option("--pretrain-epochs", o.pretrain_epochs);
  cmd->add_option("--finetune-epochs", o.finetune_epochs);
  cmd->add_option("--pretrain-lr", o.pretrain_lr);
  cmd->add_option("--finetune-lr", o.finetune_lr);
  cmd->add_option("--corruption", o.corruption, "Masking fraction in [0, 1)");
  cmd->add_option("--batch", o.batch, "Minibatch size");
  cmd->add_option("--hidden", o.hidden, "Hidden widths, e.g. 200,200,200")->delimiter(',');
  cmd->add_option("--train-per-class", o.train_per_class);
  cmd->add_option("--test-per-class", o.test_per_class);
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.fast) c = fast_profile(c);
  if (!o.method.empty()) c.method = method_from_string(o.method);
  if (!o.manifest.empty()) {
    c.dataset.kind = "manifest";
    c.dataset.manifest = o.manifest;
  }
  if (o.seed) c.train.seed = c.svm.seed = *o.seed;
  if (o.data_seed) c.dataset.seed = *o.data_seed;
  if (o.classes) c.dataset.n_classes = *o.classes;
  if (o.trials) c.dataset.trials_per_class = *o.trials;
  if (o.pretrain_epochs) c.train.pretrain_epochs = *o.pretrain_epochs;
  if (o.finetune_epochs) c.train.finetune_epochs = *o.finetune_epochs;
  if (o.pretrain_lr) c.train.pretrain_lr = *o.pretrain_lr;
  if (o.finetune_lr) c.train.finetune_lr = *o.finetune_lr;
  if (o.corruption) c.train.corruption_fraction = *o.corruption;
  if (o.batch) c.train.batch_size = *o.batch;
  if (o.hidden) c.hidden = *o.hidden;
  if (o.train_per_class) c.split.train_per_class = *o.train_per_class;
  if (o.test_per_class) c.split.test_per_class = *o.test_per_class;
  c.validate();
  return c;
}

void print_report(const ExperimentReport& r) {
  std::printf("method       %s\n", r.method.c_str());
  std::printf("accuracy     %.4f (%zu test windows, %d classes, chance %.4f)\n", r.accuracy, r.n_test, r.n_classes,
              1.0 / r.n_classes);
  std::printf("feature dim  %zu\n", r.feature_dim);
  std::printf("timing       min %.5f s  max %.5f s over %d passes\n", r.timing.min_seconds, r.timing.max_seconds,
              r.timing.repetitions);
}

void write_outputs(const ExperimentReport& r, const std::string& report, const std::string& confusion) {
  if (!report.empty()) write_report(report, r);
  if (!confusion.empty()) write_confusion_csv(confusion, r.confusion);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic object recognition with stacked denoising autoencoders"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic knock corpus");
  std::string synth_out;
  int synth_classes = 30, synth_trials = 120;
  std::uint64_t synth_seed = 42;
  double synth_noise = CorpusDesign{}.noise_std;
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->add_option("--classes", synth_classes);
  synth->add_option("--trials", synth_trials);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--noise", synth_noise, "Noise standard deviation");

  // train
  auto* train = app.add_subcommand("train", "Train a model on the training split");
  Overrides train_o;
  std::string train_model, train_log, train_dump_config;
  add_overrides(train, train_o);
  train->add_option("-m,--model", train_model, "Output model file")->required();
  train->add_option("--log", train_log, "Training log CSV (phase,layer,epoch,loss)");
  train->add_option("--dump-config", train_dump_config, "Write the resolved config as JSON");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on the test split");
  Overrides eval_o;
  std::string eval_model, eval_report, eval_confusion;
  int eval_timing = 0;
  add_overrides(eval, eval_o);
  eval->add_option("-m,--model", eval_model, "Model file")->required();
  eval->add_option("-r,--report", eval_report, "Report JSON output");
  eval->add_option("--confusion", eval_confusion, "Confusion matrix CSV output");
  eval->add_option("--timing-reps", eval_timing, "Timed passes over the test set");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Train and evaluate end to end");
  Overrides exp_o;
  std::string exp_report, exp_confusion, exp_model;
  add_overrides(exp, exp_o);
  exp->add_option("-r,--report", exp_report, "Report JSON output");
  exp->add_option("--confusion", exp_confusion, "Confusion matrix CSV output");
  exp->add_option("-m,--model", exp_model, "Also save the trained model");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Sweep one hyperparameter with repeated seeds");
  Overrides sw_o;
  std::string sw_param, sw_out, sw_summary;
  std::vector<std::string> sw_values;
  int sw_reps = 5, sw_jobs = 1;
  add_overrides(sw, sw_o);
  sw->add_option("-p,--param", sw_param, "hidden_layers | layout | hidden_nodes | pretrain_epochs | "
                                         "finetune_epochs | learning_rate | denoising")
      ->required();
  sw->add_option("--values", sw_values, "Comma-separated values (default grid per parameter)")->delimiter(',');
  sw->add_option("--reps", sw_reps, "Repetitions (seeds) per value");
  sw->add_option("-j,--jobs", sw_jobs, "Parallel jobs");
  sw->add_option("-o,--out", sw_out, "Sweep CSV (param,value,rep,accuracy,seconds)")->required();
  sw->add_option("--summary", sw_summary, "Summary CSV (param,value,mean_accuracy,delta_vs_first)");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Check backprop against central differences");
  int gc_count = 20;
  std::uint64_t gc_seed = 1;
  double gc_eps = 1e-5, gc_tol = 1e-6;
  gc->add_option("-n,--architectures", gc_count);
  gc->add_option("--seed", gc_seed);
  gc->add_option("--eps", gc_eps);
  gc->add_option("--tol", gc_tol);

  // predict
  auto* pred = app.add_subcommand("predict", "Classify one WAV file");
  std::string pred_model, pred_wav;
  std::size_t pred_window = kDefaultWindowLength;
  pred->add_option("-m,--model", pred_model)->required();
  pred->add_option("-w,--wav", pred_wav)->required();
  pred->add_option("--window", pred_window, "Window length");

  // features
  auto* feat = app.add_subcommand("features", "Dump 36-dim MFCC features as CSV");
  Overrides feat_o;
  std::string feat_out;
  add_overrides(feat, feat_o);
  feat->add_option("-o,--out", feat_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      CorpusDesign design;
      design.noise_std = synth_noise;
      const fs::path manifest = write_synthetic_corpus(synth_out, synth_classes, synth_trials, synth_seed, design);
      std::printf("wrote %d recordings, manifest %s\n", synth_classes * synth_trials, manifest.string().c_str());
    } else if (*train) {
      const ExperimentConfig c = resolve(train_o);
      if (!train_dump_config.empty()) {
        std::ofstream(train_dump_config) << config_to_json(c);
      }
      const DatasetSplit parts = split(load_dataset(c), c.split);
      TrainingLog log;
      const TrainedModel model = train_method(c, parts.train, &log);
      save_trained(model, train_model);
      if (!train_log.empty()) write_training_log_csv(train_log, log);
      std::printf("trained %s on %zu windows -> %s\n", to_string(c.method), parts.train.size(), train_model.c_str());
    } else if (*eval) {
      ExperimentConfig c = resolve(eval_o);
      if (eval_timing > 0) c.timing_repetitions = eval_timing;
      const TrainedModel model = load_trained(eval_model);
      const DatasetSplit parts = split(load_dataset(c), c.split);
      ExperimentReport r = evaluate_model(c, model, parts.test);
      r.n_train = parts.train.size();
      r.train_input_hash = parts.train.content_hash();
      print_report(r);
      write_outputs(r, eval_report, eval_confusion);
    } else if (*exp) {
      const ExperimentConfig c = resolve(exp_o);
      TrainedModel model;
      const ExperimentReport r = run_experiment(c, load_dataset(c), &model);
      print_report(r);
      write_outputs(r, exp_report, exp_confusion);
      if (!exp_model.empty()) save_trained(model, exp_model);
    } else if (*sw) {
      const ExperimentConfig c = resolve(sw_o);
      const auto values = sw_values.empty() ? default_sweep_values(sw_param) : sw_values;
      const auto results = sweep(c, sw_param, values, sw_reps, sw_jobs);
      write_sweep_csv(sw_out, results);
      if (!sw_summary.empty()) write_sweep_summary_csv(sw_summary, results);
      for (const auto& r : results)
        std::printf("%-16s %-14s mean accuracy %.4f  (%.1f s/run)\n", r.param.c_str(), r.value.c_str(),
                    r.mean_accuracy, r.mean_seconds);
    } else if (*gc) {
      Rng rng(gc_seed);
      double worst = 0.0;
      for (int i = 0; i < gc_count; ++i) {
        const bool classifier = i % 2 == 0;
        const auto inst = random_instance(rng, 4, 32, classifier, 1);
        const double err = grad_check(inst.layers, inst.activations, inst.inputs, inst.target, gc_eps);
        worst = std::max(worst, err);
        std::printf("arch %2d  layers %zu  %-13s max rel err %.3e\n", i, inst.layers.size(),
                    classifier ? "softmax+xent" : "tanh+mse", err);
      }
      std::printf("worst %.3e (tolerance %.1e): %s\n", worst, gc_tol, worst < gc_tol ? "PASS" : "FAIL");
      return worst < gc_tol ? 0 : 1;
    } else if (*pred) {
      const TrainedModel model = load_trained(pred_model);
      const Vector window = normalize(extract_window(load_wav(pred_wav), pred_window)).values;
      if (const auto* sdae = std::get_if<SdaeModel>(&model)) {
        const Prediction p = predict(*sdae, window);
        std::printf("label %d\nprobs", p.label);
        for (Eigen::Index i = 0; i < p.probs.size(); ++i) std::printf(" %.6f", p.probs[i]);
      } else {
        const SvmPrediction p = std::get<ShallowClassifier>(model).predict(window);
        std::printf("label %d\nscores", p.label);
        for (Eigen::Index i = 0; i < p.scores.size(); ++i) std::printf(" %.6f", p.scores[i]);
      }
      std::printf("\n");
    } else if (*feat) {
      const ExperimentConfig c = resolve(feat_o);
      const LabeledDataset feats = mfcc_dataset(load_dataset(c), c.mfcc);
      write_feature_csv(feat_out, feats);
      std::printf("wrote %zu x %zu features to %s\n", feats.size(), feats.dim(), feat_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "knock: %s\n", e.what());
    return 2;
  }
  return 0;
}
