// g2l command line: corpus generation, training, evaluation, inference,
// round-trip checks and the HTTP service.

#include <cstdio>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "g2l/app/pipeline.hpp"
#include "g2l/app/service.hpp"
#include "g2l/g2l.hpp"

namespace {

using namespace g2l;

enum Exit { kOk = 0, kUsage = 2, kInput = 3, kModel = 4, kInternal = 5 };

int exit_code(errc c) {
  switch (c) {
    case errc::invalid_argument: return kUsage;
    case errc::decode:
    case errc::io:
    case errc::validation: return kInput;
    case errc::model: return kModel;
    case errc::internal: return kInternal;
  }
  return kInternal;
}

void write_or_print(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

int gen_corpus(const std::string& out, const std::string& counts, std::uint64_t seed, unsigned threads) {
  CorpusConfig cfg;
  if (!counts.empty()) cfg.counts = parse_counts(counts);
  cfg.master_seed = seed;
  cfg.out_dir = out;
  cfg.threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  const auto m = generate_corpus(cfg);
  std::cout << "wrote " << m.items.size() << " items to " << out << "\n";
  return kOk;
}

int train(const std::string& corpus, const std::string& out, const cnn::HyperParams& hp, std::uint64_t seed,
          const std::string& report_path) {
  const auto manifest = read_manifest(corpus);
  const auto result = cnn::train(manifest, hp, seed, [](const cnn::EpochStats& e) {
    std::fprintf(stderr, "epoch %3d  loss %.4f  train_acc %.4f\n", e.epoch, e.train_loss, e.train_accuracy);
  });
  cnn::save_model(result.model, out);
  const auto& r = result.report;
  std::printf("epochs_run %d  final_train_accuracy %.4f  heldout_accuracy %.4f  n_train %zu  n_heldout %zu\n",
              r.epochs_run, r.final_train_accuracy, r.heldout_accuracy, r.n_train, r.n_heldout);
  for (const auto& s : r.skipped) std::fprintf(stderr, "skipped: %s\n", s.c_str());
  if (!report_path.empty()) write_text_file(report_path, cnn::report_json(r).dump(2) + "\n");
  return kOk;
}

int eval(const std::string& corpus, const std::string& model_path, bool json) {
  const auto model = app::load_model_stage(model_path);
  const auto e = app::evaluate(read_manifest(corpus), model);
  if (json) {
    std::cout << app::eval_json(e).dump(2) << "\n";
  } else {
    std::printf("n %zu  accuracy %.4f\n", e.n, e.accuracy);
    std::cout << app::confusion_table(e);
    for (const auto& s : e.skipped) std::fprintf(stderr, "skipped: %s\n", s.c_str());
  }
  return kOk;
}

int infer(const std::string& image, const std::string& model_path, const std::string& out, const std::string& report,
          bool timings) {
  const auto r = app::infer(image, model_path);
  for (const auto& w : r.artifact.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (report == "json") {
    std::cout << app::report_json(r, timings).dump(2) << "\n";
    if (!out.empty()) write_text_file(out, r.artifact.code);
  } else {
    write_or_print(r.artifact.code, out);
  }
  return kOk;
}

int roundtrip(std::size_t n, std::uint64_t seed, const std::string& model_path, bool json) {
  const auto model = app::load_model_stage(model_path);
  const auto r = app::roundtrip(n, seed, model);
  if (json) {
    std::cout << app::roundtrip_json(r).dump(2) << "\n";
    return kOk;
  }
  std::printf("n %zu  class %.3f  title %.3f  y_label %.3f  legend %.3f  lint %.3f\n", r.n, r.class_recovery_rate,
              r.title_exact_rate, r.y_label_exact_rate, r.legend_agreement_rate, r.lint_pass_rate);
  for (const auto& f : r.failures) {
    std::printf("  #%zu seed %llu %s\n", f.index, static_cast<unsigned long long>(f.seed),
                std::string(to_string(f.chart_class)).c_str());
    for (const auto& d : f.diffs) std::printf("    %s\n", d.c_str());
  }
  return kOk;
}

int serve(const std::string& model_path, const std::string& host, int port) {
  const app::Service service(app::load_model_stage(model_path), codegen::TemplateSet::builtin());
  httplib::Server server;
  service.mount(server);
  std::printf("listening on %s:%d\n", host.c_str(), port);
  std::fflush(stdout);
  if (!server.listen(host, port)) fail(errc::io, "cannot listen on " + host + ":" + std::to_string(port));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Chart image to plotting code"};
  cli.require_subcommand(1);

  std::string out, counts, corpus, model, image, report, report_path, host = "127.0.0.1";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::size_t n = 100;
  int port = 8080;
  bool json = false, no_timings = false;
  cnn::HyperParams hp;

  auto* gen = cli.add_subcommand("gen-corpus", "Render a labeled chart corpus");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--counts", counts, "Per-class counts, e.g. bar=300,pie=200 (default: full corpus)");
  gen->add_option("--seed", seed, "Master seed");
  gen->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* tr = cli.add_subcommand("train", "Train the chart classifier");
  tr->add_option("--corpus", corpus, "Corpus directory or manifest")->required();
  tr->add_option("--out", out, "Model file to write")->required();
  tr->add_option("--epochs", hp.epochs_max, "Maximum epochs");
  tr->add_option("--batch", hp.batch, "Mini-batch size");
  tr->add_option("--lr", hp.lr, "Learning rate");
  tr->add_option("--seed", seed, "Training seed");
  tr->add_option("--report", report_path, "Write the training report as JSON");

  auto* ev = cli.add_subcommand("eval", "Accuracy and confusion matrix over a corpus");
  ev->add_option("--corpus", corpus, "Corpus directory or manifest")->required();
  ev->add_option("--model", model, "Model file")->required();
  ev->add_flag("--json", json, "Print JSON");

  auto* inf = cli.add_subcommand("infer", "Generate plotting code for a chart image");
  inf->add_option("--model", model, "Model file")->required();
  inf->add_option("image", image, "PNG or PNM image")->required();
  inf->add_option("--out", out, "Write the code here instead of stdout");
  inf->add_option("--report", report, "Print the full report (json)")->check(CLI::IsMember({"json"}));
  inf->add_flag("--no-timings", no_timings, "Leave stage timings out of the report");

  auto* rt = cli.add_subcommand("roundtrip", "Render, infer and compare seeded charts");
  rt->add_option("--n", n, "Number of charts");
  rt->add_option("--seed", seed, "Master seed");
  rt->add_option("--model", model, "Model file")->required();
  rt->add_flag("--json", json, "Print JSON");

  auto* sv = cli.add_subcommand("serve", "HTTP service: POST /api/v1/generate, GET /healthz");
  sv->add_option("--model", model, "Model file")->required();
  sv->add_option("--port", port, "Port");
  sv->add_option("--host", host, "Bind address");

  auto* oc = cli.add_subcommand("ocr", "Print recognized words and phrases as JSON");
  oc->add_option("image", image, "PNG or PNM image")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return gen_corpus(out, counts, seed, threads);
    if (*tr) return train(corpus, out, hp, seed, report_path);
    if (*ev) return eval(corpus, model, json);
    if (*inf) return infer(image, model, out, report, !no_timings);
    if (*rt) return roundtrip(n, seed, model, json);
    if (*sv) return serve(model, host, port);
    if (*oc) {
      std::cout << ocr::to_json(ocr::ocr_image(read_image(image))).dump(2) << "\n";
      return kOk;
    }
  } catch (const error& e) {
    std::fprintf(stderr, "g2l: %s error%s: %s\n", std::string(to_string(e.code())).c_str(),
                 e.stage().empty() ? "" : (" in stage " + e.stage()).c_str(), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "g2l: internal error: %s\n", e.what());
    return kInternal;
  }
  return kUsage;
}
