#include "hql/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hql/csv_format.hpp"
#include "hql/errors.hpp"

#ifndef HQL_DEFAULT_DATA_DIR
#define HQL_DEFAULT_DATA_DIR "data"
#endif

namespace hql::cfg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

const std::vector<std::pair<std::string, std::string>>& documented_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"dataset", "parity | cancer | wines | mnist"},
      {"arch", "simple-a..simple-d, mnist-a..mnist-c"},
      {"conv", "LRF tiling for image architectures, e.g. '3x3/2 pad=1,0 passes=2 image=8x7', or none"},
      {"fsim_theta", "entangler swap angle (rad)"},
      {"fsim_phi", "entangler conditional phase (rad)"},
      {"data_dir", "directory holding cancer.csv, wines.csv, digits.csv"},
      {"out", "output directory"},
      {"seed", "master seed"},
      {"threads", "worker threads (results do not depend on it)"},
      {"shots", "measurement shots per expectation value, 0 = exact"},
      {"learning_rate", "SGD step size"},
      {"momentum", "Nesterov momentum"},
      {"batch_size", "samples per gradient step"},
      {"beta", "cost steepness"},
      {"gamma", "L2 weight on the trainable vector"},
      {"iterations", "SGD steps per model"},
      {"split_ratio", "train:test ratio such as 2:1, or a training fraction"},
      {"n_splits", "cross-validation splits"},
      {"selector", "named | stump | none"},
      {"columns", "comma-separated feature columns for the named selector"},
      {"top_k", "features kept by the stump selector"},
      {"balance", "upsample minority class in every one-vs-others training set"},
      {"balance_sigma", "noise width of balancing copies"},
      {"crop", "digit column removed to make 8x7 images: left | right"},
      {"checkpoint", "checkpoint file for eval and landscape"},
      {"eval_split", "train | test | all"},
      {"landscape_center", "trained | zero"},
      {"landscape_class", "class whose model is scanned for multiclass data"},
      {"landscape_half_range", "grid half width along each direction"},
      {"landscape_resolution", "grid points per axis"},
      {"scan_param", "circuit angle index to scan, -1 = all"},
      {"scan_points", "samples over [0, 2 pi)"},
      {"sweep_thetas", "entangler swap angles in units of pi"},
      {"sweep_phis", "entangler phases in units of pi"},
      {"sweep_allow_outside", "permit cells outside the stated robustness region"},
      {"arch_train", "train every configuration in arch-compare"},
      {"timing_m", "circuit parameter count"},
      {"timing_shots", "shots per expectation value"},
      {"timing_t_rep_us", "repetition period (us)"},
      {"timing_t_rewrite_us", "parameter rewrite overhead per sample (us)"},
      {"timing_batch", "batch size"},
      {"timing_iterations", "iterations"},
      {"parity_bits", "bit count for gen-parity"},
  };
  return keys;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(no) + ": empty key");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
      throw ConfigError("config line " + std::to_string(no) + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

RunConfig RunConfig::resolve(const KeyValues& overrides) {
  for (const auto& [key, value] : overrides) {
    const auto& keys = documented_keys();
    if (std::none_of(keys.begin(), keys.end(), [&](const auto& k) { return k.first == key; }))
      throw ConfigError("unknown config key '" + key + "'");
  }
  auto pick = [&](const std::string& key, const std::string& fallback) {
    const auto it = overrides.find(key);
    return it == overrides.end() ? fallback : it->second;
  };

  const auto name = data::parse_dataset_name(pick("dataset", "parity"));
  const auto arch =
      pqc::parse_arch(pick("arch", name == data::DatasetName::Mnist ? "mnist-c" : "simple-a"));
  const auto task = mc::default_task_config(name);
  const auto& t = task.ensemble.train;
  const auto rob = analysis::default_robustness_grid();
  const analysis::TimingInputs timing;

  RunConfig c;
  auto& v = c.values_;
  v["dataset"] = data::to_string(name);
  v["arch"] = pqc::to_string(arch);
  v["conv"] = pqc::is_image_arch(arch) ? enc::describe(pqc::default_conv_spec(arch)) : "none";
  v["fsim_theta"] = format_double(pqc::FSimParams{}.theta);
  v["fsim_phi"] = format_double(pqc::FSimParams{}.phi);
  v["data_dir"] = HQL_DEFAULT_DATA_DIR;
  v["out"] = "out";
  v["seed"] = std::to_string(t.master_seed);
  v["threads"] = "1";
  v["shots"] = "0";
  v["learning_rate"] = format_double(t.learning_rate);
  v["momentum"] = format_double(t.momentum);
  v["batch_size"] = std::to_string(t.batch_size);
  v["beta"] = format_double(t.cost_beta);
  v["gamma"] = format_double(t.cost_gamma);
  v["iterations"] = std::to_string(t.iterations);
  v["split_ratio"] = name == data::DatasetName::Parity ? "1:1" : "2:1";
  v["n_splits"] = "6";
  v["selector"] = task.selector == mc::SelectorMode::None ? "none" : "named";
  v["columns"] = join(enc::default_columns(name));
  v["top_k"] = std::to_string(task.top_k);
  v["balance"] = bool_text(task.ensemble.balance);
  v["balance_sigma"] = format_double(task.ensemble.balance_sigma);
  v["crop"] = "right";
  v["checkpoint"] = "";
  v["eval_split"] = "test";
  v["landscape_center"] = "trained";
  v["landscape_class"] = "0";
  v["landscape_half_range"] = format_double(std::numbers::pi);
  v["landscape_resolution"] = "41";
  v["scan_param"] = "-1";
  v["scan_points"] = "64";
  v["sweep_thetas"] = "0.2,0.5,0.8";
  v["sweep_phis"] = "-0.5,0,0.5";
  v["sweep_allow_outside"] = bool_text(rob.allow_outside);
  v["arch_train"] = "true";
  v["timing_m"] = std::to_string(timing.m);
  v["timing_shots"] = std::to_string(timing.shots);
  v["timing_t_rep_us"] = std::to_string(timing.t_rep.count());
  v["timing_t_rewrite_us"] = std::to_string(timing.t_rewrite.count());
  v["timing_batch"] = std::to_string(timing.batch);
  v["timing_iterations"] = std::to_string(timing.iterations);
  v["parity_bits"] = "4";

  for (const auto& [key, value] : overrides) v[key] = value;
  // normalize the two enumerations so snapshots are canonical
  v["dataset"] = data::to_string(c.dataset());
  v["arch"] = pqc::to_string(c.arch());
  return c;
}

const std::string& RunConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const {
  try {
    return parse_double(text(key));
  } catch (const std::invalid_argument&) {
    throw ConfigError("config key '" + key + "' is not a number: '" + text(key) + "'");
  }
}

long long RunConfig::integer(const std::string& key) const {
  const auto& s = text(key);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw ConfigError("config key '" + key + "' is not an integer: '" + s + "'");
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const auto& s = text(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: '" + s + "'");
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
  std::vector<std::string> out;
  const auto& s = text(key);
  if (trim(s).empty()) return out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list(key)) {
    try {
      out.push_back(parse_double(item));
    } catch (const std::invalid_argument&) {
      throw ConfigError("config key '" + key + "' has a non-numeric entry '" + item + "'");
    }
  }
  return out;
}

data::DatasetName RunConfig::dataset() const { return data::parse_dataset_name(text("dataset")); }
pqc::ArchId RunConfig::arch() const { return pqc::parse_arch(text("arch")); }

pqc::CircuitTemplate RunConfig::circuit() const {
  const auto a = arch();
  std::optional<enc::ConvSpec> conv;
  if (text("conv") != "none") conv = enc::parse_conv_spec(text("conv"));
  return pqc::build_template(a, conv, {number("fsim_theta"), number("fsim_phi")});
}

data::ColumnCrop RunConfig::crop() const {
  const auto& s = text("crop");
  if (s == "left") return data::ColumnCrop::Left;
  if (s == "right") return data::ColumnCrop::Right;
  throw ConfigError("crop must be left or right, got '" + s + "'");
}

int RunConfig::threads() const {
  const auto n = integer("threads");
  if (n < 1) throw ConfigError("threads must be >= 1");
  return static_cast<int>(n);
}

mc::TaskConfig RunConfig::task() const {
  mc::TaskConfig tc;
  const auto& sel = text("selector");
  if (sel == "named")
    tc.selector = mc::SelectorMode::Named;
  else if (sel == "stump")
    tc.selector = mc::SelectorMode::StumpTopK;
  else if (sel == "none")
    tc.selector = mc::SelectorMode::None;
  else
    throw ConfigError("selector must be named, stump or none, got '" + sel + "'");
  tc.columns = list("columns");
  const auto k = integer("top_k");
  if (k < 1) throw ConfigError("top_k must be >= 1");
  tc.top_k = static_cast<std::size_t>(k);
  tc.train_fraction = data::parse_ratio(text("split_ratio"));
  tc.ensemble.balance = flag("balance");
  tc.ensemble.balance_sigma = number("balance_sigma");

  auto& t = tc.ensemble.train;
  t.learning_rate = number("learning_rate");
  t.momentum = number("momentum");
  t.batch_size = static_cast<int>(integer("batch_size"));
  t.cost_beta = number("beta");
  t.cost_gamma = number("gamma");
  t.iterations = static_cast<int>(integer("iterations"));
  const auto shots = integer("shots");
  if (shots < 0) throw ConfigError("shots must be >= 0");
  t.shots = static_cast<std::uint32_t>(shots);
  const auto seed = integer("seed");
  if (seed < 0) throw ConfigError("seed must be >= 0");
  t.master_seed = static_cast<std::uint64_t>(seed);
  t.threads = threads();
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return tc;
}

analysis::LandscapeConfig RunConfig::landscape() const {
  analysis::LandscapeConfig lc;
  lc.half_range = number("landscape_half_range");
  lc.resolution = static_cast<int>(integer("landscape_resolution"));
  lc.beta = number("beta");
  lc.gamma = number("gamma");
  lc.seed = static_cast<std::uint64_t>(integer("seed"));
  lc.threads = threads();
  return lc;
}

analysis::RobustnessConfig RunConfig::robustness() const {
  analysis::RobustnessConfig rc;
  for (double t : numbers("sweep_thetas")) rc.thetas.push_back(t * std::numbers::pi);
  for (double p : numbers("sweep_phis")) rc.phis.push_back(p * std::numbers::pi);
  rc.n_splits = static_cast<std::size_t>(std::max(1LL, integer("n_splits")));
  rc.nominal = {number("fsim_theta"), number("fsim_phi")};
  rc.allow_outside = flag("sweep_allow_outside");
  rc.threads = threads();
  return rc;
}

analysis::TimingInputs RunConfig::timing() const {
  analysis::TimingInputs in;
  in.m = static_cast<int>(integer("timing_m"));
  in.shots = integer("timing_shots");
  in.t_rep = analysis::Micros{integer("timing_t_rep_us")};
  in.t_rewrite = analysis::Micros{integer("timing_t_rewrite_us")};
  in.batch = static_cast<int>(integer("timing_batch"));
  in.iterations = static_cast<int>(integer("timing_iterations"));
  return in;
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << '=' << v << '\n';
  return out.str();
}

}  // namespace hql::cfg
