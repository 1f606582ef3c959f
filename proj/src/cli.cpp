#include "hql/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hql/analysis.hpp"
#include "hql/checkpoint.hpp"
#include "hql/csv_format.hpp"
#include "hql/errors.hpp"
#include "hql/run_config.hpp"

namespace hql::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;  // key -> value from dedicated flags
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

cfg::RunConfig resolve(const Options& opt) {
  cfg::KeyValues kv;
  if (!opt.config_file.empty()) kv = cfg::load_key_values(opt.config_file);
  for (const auto& s : opt.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  for (const auto& [k, v] : opt.flags) kv[k] = v;
  return cfg::RunConfig::resolve(kv);
}

fs::path prepare_out(const cfg::RunConfig& rc) {
  const fs::path dir = rc.out_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file(dir / "config.txt", rc.to_text());
  return dir;
}

data::LabeledDataset load_raw(const cfg::RunConfig& rc) {
  return data::load_named(rc.dataset(), rc.data_dir(), rc.crop());
}

std::string metrics_csv(const mc::SplitOutcome& s) {
  std::ostringstream out;
  out << "subset,accuracy\n";
  out << "train," << format_double(s.train_accuracy) << '\n';
  out << "test," << format_double(s.test_accuracy) << '\n';
  return out.str();
}

std::string class_csv(const mc::SplitOutcome& s) {
  std::ostringstream out;
  out << "class,test_accuracy\n";
  for (std::size_t i = 0; i < s.class_test_accuracy.size(); ++i)
    out << s.ensemble.classes[i] << ',' << format_double(s.class_test_accuracy[i]) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

int cmd_train(const cfg::RunConfig& rc, std::ostream& out) {
  const auto raw = load_raw(rc);
  const auto tmpl = rc.circuit();
  const auto task = rc.task();
  const auto dir = prepare_out(rc);
  const auto res = mc::run_split(raw, rc.dataset(), tmpl, task, 0);

  if (res.histories.size() == 1) {
    write_file(dir / "history.csv", res.histories[0].to_csv());
  } else {
    for (std::size_t i = 0; i < res.histories.size(); ++i)
      write_file(dir / ("history_class_" + std::to_string(res.ensemble.classes[i]) + ".csv"),
                 res.histories[i].to_csv());
    write_file(dir / "class_metrics.csv", class_csv(res));
    write_file(dir / "confusion.csv", res.confusion->to_csv());
  }
  write_file(dir / "metrics.csv", metrics_csv(res));
  ckpt::Checkpoint c{tmpl.describe(), rc.dataset(), res.preprocessor, res.ensemble};
  ckpt::save(dir / "checkpoint.txt", c);
  out << "train_accuracy " << format_double(res.train_accuracy) << "\n"
      << "test_accuracy " << format_double(res.test_accuracy) << "\n";
  return kOk;
}

int cmd_eval(const cfg::RunConfig& rc, const cfg::KeyValues& explicit_keys, std::ostream& out) {
  if (rc.text("checkpoint").empty()) throw ConfigError("eval needs a checkpoint (--checkpoint)");
  const auto c = ckpt::load(rc.text("checkpoint"));
  const auto tmpl = pqc::parse_template(c.template_description);
  if (explicit_keys.count("arch") && rc.arch() != tmpl.arch())
    throw ConfigError("checkpoint is for " + pqc::to_string(tmpl.arch()) + ", not " +
                      pqc::to_string(rc.arch()));
  if (explicit_keys.count("dataset") && rc.dataset() != c.dataset)
    throw ConfigError("checkpoint is for dataset " + data::to_string(c.dataset) + ", not " +
                      data::to_string(rc.dataset()));

  const auto raw = data::load_named(c.dataset, rc.data_dir(), rc.crop());
  const double fraction = data::parse_ratio(rc.text("split_ratio"));
  const auto seed = derive_seed(static_cast<std::uint64_t>(rc.integer("seed")), "split", 0);
  const auto [tr, te] = data::split(raw, fraction, seed);
  const auto& which = rc.text("eval_split");
  const data::LabeledDataset* chosen = nullptr;
  if (which == "train")
    chosen = &tr;
  else if (which == "test")
    chosen = &te;
  else if (which == "all")
    chosen = &raw;
  else
    throw ConfigError("eval_split must be train, test or all, got '" + which + "'");

  const auto encoded = c.preprocessor.transform(*chosen);
  const auto dir = prepare_out(rc);
  const double acc = mc::ensemble_accuracy(tmpl, c.ensemble, encoded, rc.threads());
  std::ostringstream m;
  m << "subset,samples,accuracy\n" << which << ',' << encoded.size() << ',' << format_double(acc) << '\n';
  write_file(dir / "eval_metrics.csv", m.str());
  if (c.ensemble.size() > 1)
    write_file(dir / "eval_confusion.csv", mc::confusion(tmpl, c.ensemble, encoded, rc.threads()).to_csv());
  out << "accuracy " << format_double(acc) << "\n";
  return kOk;
}

int cmd_crossval(const cfg::RunConfig& rc, std::ostream& out) {
  const auto raw = load_raw(rc);
  const auto tmpl = rc.circuit();
  const auto task = rc.task();
  const auto n = rc.integer("n_splits");
  if (n < 1) throw ConfigError("n_splits must be >= 1");
  const auto dir = prepare_out(rc);
  const auto cv = mc::cross_validate(raw, rc.dataset(), tmpl, task, static_cast<std::size_t>(n));
  write_file(dir / "crossval.csv", cv.to_csv());
  std::ostringstream s;
  s << "splits,mean_accuracy,stddev\n" << n << ',' << format_double(cv.mean) << ','
    << format_double(cv.stddev) << '\n';
  write_file(dir / "crossval_summary.csv", s.str());
  out << "mean_accuracy " << format_double(cv.mean) << "\nstddev " << format_double(cv.stddev)
      << "\n";
  return kOk;
}

int cmd_landscape(const cfg::RunConfig& rc, std::ostream& out) {
  const auto raw = load_raw(rc);
  const auto task = rc.task();
  const auto dir = prepare_out(rc);

  std::optional<pqc::CircuitTemplate> tmpl;
  enc::Preprocessor prep;
  mc::Ensemble ens;
  const auto fraction = task.train_fraction;
  const auto [raw_tr, raw_te] =
      data::split(raw, fraction, derive_seed(task.ensemble.train.master_seed, "split", 0));
  if (!rc.text("checkpoint").empty()) {
    auto c = ckpt::load(rc.text("checkpoint"));
    tmpl.emplace(pqc::parse_template(c.template_description));
    prep = std::move(c.preprocessor);
    ens = std::move(c.ensemble);
  } else {
    tmpl.emplace(rc.circuit());
    if (rc.text("landscape_center") == "zero") {
      prep = mc::fit_preprocessor(raw_tr, rc.dataset(), task);
      for (int c : raw.classes()) {
        ens.classes.push_back(c);
        ens.models.push_back(train::ModelParams::zeros(*tmpl));
      }
      if (mc::is_binary(raw)) {
        ens.classes = {1};
        ens.models.resize(1);
      }
    } else if (rc.text("landscape_center") == "trained") {
      auto res = mc::run_split(raw, rc.dataset(), *tmpl, task, 0);
      prep = std::move(res.preprocessor);
      ens = std::move(res.ensemble);
    } else {
      throw ConfigError("landscape_center must be trained or zero");
    }
  }

  auto test = prep.transform(raw_te);
  std::size_t model = 0;
  if (ens.size() > 1) {
    const auto cls = static_cast<int>(rc.integer("landscape_class"));
    const auto it = std::find(ens.classes.begin(), ens.classes.end(), cls);
    if (it == ens.classes.end()) throw ConfigError("landscape_class " + std::to_string(cls) + " not in model");
    model = static_cast<std::size_t>(it - ens.classes.begin());
    test = data::one_vs_rest(test, cls);
  }
  const auto lc = rc.landscape();
  const auto grid = analysis::landscape_2d(*tmpl, ens.models[model], test, lc);
  write_file(dir / "landscape.csv", grid.to_csv());
  write_file(dir / "landscape_minima.csv", grid.minima_csv());
  const auto slice = analysis::slice_1d(*tmpl, ens.models[model], test, grid.dir_a, lc);
  std::ostringstream s;
  s << "a,cost\n";
  for (std::size_t i = 0; i < slice.size(); ++i)
    s << format_double(grid.offsets[i]) << ',' << format_double(slice[i]) << '\n';
  write_file(dir / "slice.csv", s.str());
  out << "center_cost " << format_double(grid.at(lc.resolution / 2, lc.resolution / 2)) << "\n"
      << "local_minima " << grid.minima.size() << "\n";
  return kOk;
}

int cmd_scan(const cfg::RunConfig& rc, std::ostream& out) {
  const auto tmpl = rc.circuit();
  const auto dir = prepare_out(rc);
  const auto which = rc.integer("scan_param");
  const auto points = static_cast<int>(rc.integer("scan_points"));
  std::vector<int> params;
  if (which < 0)
    for (int j = 0; j < tmpl.weight_count(); ++j) params.push_back(j);
  else
    params.push_back(static_cast<int>(which));

  std::ostringstream samples, fits;
  samples << "param,angle,g,fit\n";
  fits << "param,amplitude,phase,offset,max_residual\n";
  double worst = 0.0;
  for (int j : params) {
    const auto scan = analysis::harmonic_scan(tmpl, j, points);
    const auto& f = scan.fit;
    for (std::size_t k = 0; k < scan.angles.size(); ++k)
      samples << j << ',' << format_double(scan.angles[k]) << ',' << format_double(scan.values[k])
              << ',' << format_double(f.amplitude * std::cos(scan.angles[k] - f.phase) + f.offset)
              << '\n';
    fits << j << ',' << format_double(f.amplitude) << ',' << format_double(f.phase) << ','
         << format_double(f.offset) << ',' << format_double(f.max_residual) << '\n';
    worst = std::max(worst, f.max_residual);
  }
  write_file(dir / "scan.csv", samples.str());
  write_file(dir / "scan_fits.csv", fits.str());
  out << "max_residual " << format_double(worst) << "\n";
  return kOk;
}

int cmd_sweep(const cfg::RunConfig& rc, std::ostream& out) {
  const auto raw = load_raw(rc);
  const auto task = rc.task();
  const auto rob = rc.robustness();
  if (pqc::is_image_arch(rc.arch())) throw ConfigError("sweep supports angle-encoded architectures only");
  const auto dir = prepare_out(rc);
  const auto grid = analysis::robustness_sweep(raw, rc.dataset(), rc.arch(), task, rob);
  write_file(dir / "robustness.csv", grid.to_csv());
  double worst = 0.0;
  for (const auto& c : grid.cells) worst = std::max(worst, std::abs(c.accuracy - grid.nominal.accuracy));
  out << "nominal_accuracy " << format_double(grid.nominal.accuracy) << "\n"
      << "max_deviation " << format_double(worst) << "\n";
  return kOk;
}

int cmd_arch_compare(const cfg::RunConfig& rc, std::ostream& out) {
  const bool train = rc.flag("arch_train");
  const auto task = rc.task();
  const auto dir = prepare_out(rc);
  data::LabeledDataset raw;
  if (train) raw = load_raw(rc);
  const auto rows = analysis::arch_compare(raw, rc.dataset(), pqc::image_config_catalog(), task, train);
  const auto csv = analysis::arch_table_csv(rows, task.ensemble.train.learning_rate);
  write_file(dir / "arch_table.csv", csv);
  out << csv;
  return kOk;
}

int cmd_estimate_time(const cfg::RunConfig& rc, std::ostream& out) {
  const auto report = analysis::hardware_time_estimate(rc.timing());
  const auto dir = prepare_out(rc);
  write_file(dir / "timing.csv", report.to_csv());
  const auto layers = rc.circuit().layer_count();
  const auto t_pqc = analysis::pqc_execution_time(layers);
  std::ostringstream p;
  p << "layers,t_pqc_ns\n" << layers << ',' << t_pqc.count() << '\n';
  write_file(dir / "pqc_time.csv", p.str());
  out << "t_grad_s " << analysis::seconds_text(report.t_grad) << "\n"
      << "t_per_sample_s " << analysis::seconds_text(report.t_per_sample) << "\n"
      << "t_iteration_s " << analysis::seconds_text(report.t_iteration) << "\n"
      << "t_total_s " << analysis::seconds_text(report.t_total) << "\n"
      << "t_pqc_ns " << t_pqc.count() << "\n";
  return kOk;
}

int cmd_gen_parity(const cfg::RunConfig& rc, std::ostream& out) {
  const auto bits = rc.integer("parity_bits");
  if (bits < 1 || bits > 16) throw ConfigError("parity_bits must be in [1, 16]");
  const auto ds = data::gen_parity(static_cast<int>(bits));
  const auto dir = prepare_out(rc);
  write_file(dir / "parity.csv", data::to_csv(ds));
  out << "rows " << ds.size() << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid quantum classifier toolkit (4-qubit statevector simulation)"};
  app.require_subcommand(1);
  Options opt;

  // shared option bundle: every flag maps onto a config key
  std::map<std::string, std::string> flag_values;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_file, "key=value config file (e.g. a config.txt snapshot)");
    sub->add_option("--set", opt.sets, "override any config key, key=value (repeatable)");
    for (const auto& [flag, key] :
         std::vector<std::pair<std::string, std::string>>{{"--data-dir", "data_dir"},
                                                          {"--out", "out"},
                                                          {"--seed", "seed"},
                                                          {"--threads", "threads"},
                                                          {"--shots", "shots"},
                                                          {"--arch", "arch"},
                                                          {"--dataset", "dataset"}}) {
      sub->add_option_function<std::string>(
          flag, [&flag_values, key = key](const std::string& v) { flag_values[key] = v; },
          "config key " + key);
    }
  };

  struct Cmd {
    const char* name;
    const char* help;
  };
  const std::vector<Cmd> cmds = {
      {"train", "train on split 0 and write history, metrics and a checkpoint"},
      {"eval", "evaluate a checkpoint on a split"},
      {"crossval", "cross-validated accuracy over n_splits seeded splits"},
      {"landscape", "2D cost landscape and 1D slice around a model"},
      {"scan", "harmonic scan of circuit angles"},
      {"sweep", "entangler-imperfection robustness grid"},
      {"arch-compare", "image architecture table"},
      {"estimate-time", "hardware time estimate"},
      {"gen-parity", "write the parity dataset"},
      {"keys", "list documented config keys"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    if (std::string(c.name) != "keys") add_common(sub);
    subs[c.name] = sub;
  }
  subs["eval"]->add_option_function<std::string>(
      "--checkpoint", [&](const std::string& v) { flag_values["checkpoint"] = v; }, "checkpoint file");
  subs["landscape"]->add_option_function<std::string>(
      "--checkpoint", [&](const std::string& v) { flag_values["checkpoint"] = v; }, "checkpoint file");
  subs["eval"]->add_option_function<std::string>(
      "--split", [&](const std::string& v) { flag_values["eval_split"] = v; }, "train | test | all");
  subs["gen-parity"]->add_option_function<std::string>(
      "--bits", [&](const std::string& v) { flag_values["parity_bits"] = v; }, "bit count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (subs["keys"]->parsed()) {
      for (const auto& [k, d] : cfg::documented_keys()) out << k << "  " << d << "\n";
      return kOk;
    }
    opt.flags = flag_values;
    const auto rc = resolve(opt);
    cfg::KeyValues explicit_keys = opt.flags;
    if (!opt.config_file.empty())
      for (const auto& [k, v] : cfg::load_key_values(opt.config_file)) explicit_keys[k] = v;

    if (subs["train"]->parsed()) return cmd_train(rc, out);
    if (subs["eval"]->parsed()) return cmd_eval(rc, explicit_keys, out);
    if (subs["crossval"]->parsed()) return cmd_crossval(rc, out);
    if (subs["landscape"]->parsed()) return cmd_landscape(rc, out);
    if (subs["scan"]->parsed()) return cmd_scan(rc, out);
    if (subs["sweep"]->parsed()) return cmd_sweep(rc, out);
    if (subs["arch-compare"]->parsed()) return cmd_arch_compare(rc, out);
    if (subs["estimate-time"]->parsed()) return cmd_estimate_time(rc, out);
    if (subs["gen-parity"]->parsed()) return cmd_gen_parity(rc, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace hql::cli
