#include "hql/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "hql/csv_format.hpp"
#include "hql/errors.hpp"

namespace hql::ckpt {

namespace {

std::string selector_mode(const std::optional<enc::FeatureSelector>& sel) {
  if (!sel) return "none";
  return sel->mode == enc::FeatureSelector::Mode::StumpTopK ? "stump" : "named";
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::istringstream next(const std::string& keyword) {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of file, expected '" + keyword + "'");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string head;
    fields >> head;
    if (head != keyword) fail("expected '" + keyword + "', found '" + head + "'");
    fields >> std::ws;
    return fields;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("checkpoint line " + std::to_string(line_no_) + ": " + what);
  }

  double number(std::istringstream& fields) const {
    std::string tok;
    if (!(fields >> tok)) fail("missing number");
    try {
      return parse_double(tok);
    } catch (const std::invalid_argument&) {
      fail("bad number '" + tok + "'");
    }
  }

  long long integer(std::istringstream& fields) const {
    long long v = 0;
    if (!(fields >> v)) fail("missing integer");
    return v;
  }

  int line() const { return line_no_; }

 private:
  std::istringstream in_;
  int line_no_ = 0;
};

}  // namespace

std::string to_text(const Checkpoint& c) {
  std::ostringstream out;
  out << kMagic << " v" << kVersion << '\n';
  out << "template " << c.template_description << '\n';
  out << "dataset " << data::to_string(c.dataset) << '\n';
  const auto& sel = c.preprocessor.selector;
  out << "selector " << selector_mode(sel) << ' ' << (sel ? sel->size() : 0) << '\n';
  if (sel) {
    for (std::size_t i = 0; i < sel->size(); ++i)
      out << "column " << sel->indices[i] << ' ' << sel->names[i] << '\n';
    const auto& st = *c.preprocessor.standardizer;
    for (std::size_t i = 0; i < sel->size(); ++i)
      out << "standardizer " << format_double(st.means[i]) << ' ' << format_double(st.scales[i])
          << '\n';
  }
  out << "classes " << c.ensemble.classes.size();
  for (int k : c.ensemble.classes) out << ' ' << k;
  out << '\n';
  for (std::size_t m = 0; m < c.ensemble.size(); ++m) {
    const auto flat = c.ensemble.models[m].flatten();
    out << "model " << c.ensemble.classes[m] << ' ' << flat.size();
    for (double v : flat) out << ' ' << format_double(v);
    out << '\n';
  }
  return out.str();
}

Checkpoint parse(const std::string& text) {
  LineReader r(text);
  {
    std::string magic, version;
    std::istringstream first(text.substr(0, text.find('\n')));
    first >> magic >> version;
    if (magic != kMagic) throw DataError("not a checkpoint file (bad header '" + magic + "')");
    if (version != "v" + std::to_string(kVersion))
      throw DataError("unsupported checkpoint version '" + version + "', expected v" +
                      std::to_string(kVersion));
    r.next(kMagic);
  }
  Checkpoint c;
  {
    auto f = r.next("template");
    std::getline(f, c.template_description);
  }
  const pqc::CircuitTemplate tmpl = [&] {
    try {
      return pqc::parse_template(c.template_description);
    } catch (const std::exception& e) {
      r.fail(std::string("bad template: ") + e.what());
    }
  }();
  {
    auto f = r.next("dataset");
    std::string name;
    f >> name;
    try {
      c.dataset = data::parse_dataset_name(name);
    } catch (const std::exception&) {
      r.fail("unknown dataset '" + name + "'");
    }
  }
  {
    auto f = r.next("selector");
    std::string mode;
    f >> mode;
    const long long n = r.integer(f);
    if (n < 0) r.fail("negative column count");
    if (mode != "none") {
      if (mode != "named" && mode != "stump") r.fail("unknown selector mode '" + mode + "'");
      enc::FeatureSelector sel;
      sel.mode = mode == "stump" ? enc::FeatureSelector::Mode::StumpTopK
                                 : enc::FeatureSelector::Mode::NamedColumns;
      for (long long i = 0; i < n; ++i) {
        auto col = r.next("column");
        const long long idx = r.integer(col);
        if (idx < 0) r.fail("negative column index");
        std::string name;
        std::getline(col >> std::ws, name);
        sel.indices.push_back(static_cast<std::size_t>(idx));
        sel.names.push_back(name);
      }
      enc::Standardizer st;
      for (long long i = 0; i < n; ++i) {
        auto s = r.next("standardizer");
        st.means.push_back(r.number(s));
        st.scales.push_back(r.number(s));
      }
      c.preprocessor.selector = std::move(sel);
      c.preprocessor.standardizer = std::move(st);
    }
  }
  {
    auto f = r.next("classes");
    const long long k = r.integer(f);
    if (k < 1) r.fail("class count must be positive");
    for (long long i = 0; i < k; ++i) c.ensemble.classes.push_back(static_cast<int>(r.integer(f)));
  }
  const auto expected = static_cast<std::size_t>(tmpl.trainable_count());
  for (int cls : c.ensemble.classes) {
    auto f = r.next("model");
    if (r.integer(f) != cls) r.fail("model order does not match the class list");
    const long long n = r.integer(f);
    if (n < 0 || static_cast<std::size_t>(n) != expected)
      r.fail("model has " + std::to_string(n) + " parameters, template needs " +
             std::to_string(expected));
    std::vector<double> flat;
    for (long long i = 0; i < n; ++i) flat.push_back(r.number(f));
    c.ensemble.models.push_back(train::ModelParams::unflatten(tmpl, flat));
  }
  return c;
}

void save(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << to_text(ckpt);
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void require_template(const Checkpoint& ckpt, const pqc::CircuitTemplate& tmpl) {
  if (ckpt.template_description != tmpl.describe())
    throw ConfigError("checkpoint template '" + ckpt.template_description +
                      "' does not match requested '" + tmpl.describe() + "'");
}

}  // namespace hql::ckpt
