#include "svytree/tree_io.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace svytree {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

Json number(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

const char* to_string(GammaForm f) { return f == GammaForm::log ? "log" : "power"; }
const char* to_string(SplitKind k) { return k == SplitKind::mse ? "mse" : "median_fallback"; }
const char* to_string(SparseLeafValue v) { return v == SparseLeafValue::zero ? "zero" : "hajek"; }

Json node_to_json(const TreeModel& model, std::size_t idx) {
  const auto& node = model.nodes[idx];
  Json j;
  if (node.is_leaf) {
    j["kind"] = "leaf";
    j["estimate"] = number(node.estimate);
    j["sample_count"] = node.sample_count;
    j["weighted_count"] = number(node.weighted_count);
    j["dense"] = node.dense;
    j["no_valid_split"] = node.no_valid_split;
  } else {
    j["kind"] = "internal";
    j["variable"] = node.variable;
    j["cutpoint"] = number(node.cutpoint);
    j["split_kind"] = to_string(node.split_kind);
    j["sample_count"] = node.sample_count;
    j["weighted_count"] = number(node.weighted_count);
    j["left"] = node_to_json(model, static_cast<std::size_t>(node.left));
    j["right"] = node_to_json(model, static_cast<std::size_t>(node.right));
  }
  return j;
}

class Reader {
 public:
  explicit Reader(TreeModel& model) : model_(model) {}

  static const Json& field(const Json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw TreeFormatError("expected an object", path);
    auto it = obj.find(key);
    if (it == obj.end()) throw TreeFormatError(std::string("missing field '") + key + "'", path);
    return *it;
  }

  static double real(const Json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    const std::string where = path + "/" + key;
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      if (s == "inf") return kInf;
      if (s == "-inf") return -kInf;
      throw TreeFormatError("expected a number", where);
    }
    if (!v.is_number()) throw TreeFormatError("expected a number", where);
    return v.get<double>();
  }

  static std::size_t count(const Json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_number_unsigned()) {
      throw TreeFormatError("expected a non-negative integer", path + "/" + key);
    }
    return v.get<std::size_t>();
  }

  static bool flag(const Json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_boolean()) throw TreeFormatError("expected true or false", path + "/" + key);
    return v.get<bool>();
  }

  static std::string text(const Json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_string()) throw TreeFormatError("expected a string", path + "/" + key);
    return v.get<std::string>();
  }

  std::int32_t node(const Json& j, const std::string& path) {
    const auto idx = static_cast<std::int32_t>(model_.nodes.size());
    model_.nodes.emplace_back();
    TreeNode n;
    const auto kind = text(j, "kind", path);
    n.sample_count = count(j, "sample_count", path);
    n.weighted_count = real(j, "weighted_count", path);
    if (kind == "leaf") {
      n.is_leaf = true;
      n.estimate = real(j, "estimate", path);
      n.dense = flag(j, "dense", path);
      n.no_valid_split = flag(j, "no_valid_split", path);
    } else if (kind == "internal") {
      n.is_leaf = false;
      n.variable = count(j, "variable", path);
      if (n.variable >= model_.d) throw TreeFormatError("variable index out of range", path + "/variable");
      n.cutpoint = real(j, "cutpoint", path);
      if (!std::isfinite(n.cutpoint)) throw TreeFormatError("cutpoint must be finite", path + "/cutpoint");
      const auto sk = text(j, "split_kind", path);
      if (sk == "mse") {
        n.split_kind = SplitKind::mse;
      } else if (sk == "median_fallback") {
        n.split_kind = SplitKind::median_fallback;
      } else {
        throw TreeFormatError("unknown split_kind '" + sk + "'", path + "/split_kind");
      }
      n.left = node(field(j, "left", path), path + "/left");
      n.right = node(field(j, "right", path), path + "/right");
    } else {
      throw TreeFormatError("unknown node kind '" + kind + "'", path + "/kind");
    }
    model_.nodes[static_cast<std::size_t>(idx)] = n;
    return idx;
  }

 private:
  TreeModel& model_;
};

}  // namespace

TreeFormatError::TreeFormatError(const std::string& message, std::string where)
    : std::runtime_error("tree file " + where + ": " + message), where_(std::move(where)) {}

std::string serialize_tree(const TreeModel& model) {
  Json doc;
  doc["format_version"] = kTreeFormatVersion;
  Json cfg;
  cfg["alpha"] = model.config.rates.alpha;
  cfg["epsilon"] = model.config.rates.epsilon;
  cfg["gamma_form"] = to_string(model.config.rates.gamma_form);
  cfg["gamma_scale"] = model.config.rates.gamma_scale ? number(*model.config.rates.gamma_scale) : Json("auto");
  cfg["p_threshold"] = model.config.p_threshold;
  cfg["use_weighted_median"] = model.config.use_weighted_median;
  cfg["sparse_leaf_value"] = to_string(model.config.sparse_leaf_value);
  doc["config"] = std::move(cfg);
  doc["n"] = model.n;
  doc["d"] = model.d;
  doc["variables"] = model.variable_names;
  doc["k"] = model.k;
  doc["gamma"] = number(model.gamma);
  doc["gamma_scale"] = number(model.gamma_scale);
  doc["root"] = node_to_json(model, 0);
  return doc.dump(2) + "\n";
}

void serialize_tree(const TreeModel& model, std::ostream& out) { out << serialize_tree(model); }

TreeModel parse_tree(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw TreeFormatError(e.what(), "byte " + std::to_string(e.byte));
  }
  const std::string top;
  const auto& version = Reader::field(doc, "format_version", top);
  if (!version.is_number_integer()) throw TreeFormatError("expected an integer", "/format_version");
  if (version.get<long long>() != kTreeFormatVersion) {
    throw TreeFormatError("unsupported format_version " + version.dump() + " (expected " +
                              std::to_string(kTreeFormatVersion) + ")",
                          "/format_version");
  }

  TreeModel model;
  const auto& cfg = Reader::field(doc, "config", top);
  model.config.rates.alpha = Reader::real(cfg, "alpha", "/config");
  model.config.rates.epsilon = Reader::real(cfg, "epsilon", "/config");
  const auto form = Reader::text(cfg, "gamma_form", "/config");
  if (form == "log") {
    model.config.rates.gamma_form = GammaForm::log;
  } else if (form == "power") {
    model.config.rates.gamma_form = GammaForm::power;
  } else {
    throw TreeFormatError("unknown gamma_form '" + form + "'", "/config/gamma_form");
  }
  const auto& scale = Reader::field(cfg, "gamma_scale", "/config");
  if (!(scale.is_string() && scale.get_ref<const std::string&>() == "auto")) {
    model.config.rates.gamma_scale = Reader::real(cfg, "gamma_scale", "/config");
  }
  model.config.p_threshold = Reader::real(cfg, "p_threshold", "/config");
  model.config.use_weighted_median = Reader::flag(cfg, "use_weighted_median", "/config");
  const auto sparse = Reader::text(cfg, "sparse_leaf_value", "/config");
  if (sparse == "zero") {
    model.config.sparse_leaf_value = SparseLeafValue::zero;
  } else if (sparse == "hajek") {
    model.config.sparse_leaf_value = SparseLeafValue::hajek;
  } else {
    throw TreeFormatError("unknown sparse_leaf_value '" + sparse + "'", "/config/sparse_leaf_value");
  }
  try {
    model.config.validate();
  } catch (const std::invalid_argument& e) {
    throw TreeFormatError(e.what(), "/config");
  }

  model.n = Reader::count(doc, "n", top);
  model.d = Reader::count(doc, "d", top);
  if (model.d == 0) throw TreeFormatError("d must be >= 1", "/d");
  const auto& names = Reader::field(doc, "variables", top);
  if (!names.is_array() || names.size() != model.d) {
    throw TreeFormatError("expected an array of d variable names", "/variables");
  }
  for (const auto& name : names) {
    if (!name.is_string()) throw TreeFormatError("expected a string", "/variables");
    model.variable_names.push_back(name.get<std::string>());
  }
  model.k = Reader::count(doc, "k", top);
  model.gamma = Reader::real(doc, "gamma", top);
  model.gamma_scale = Reader::real(doc, "gamma_scale", top);

  Reader reader(model);
  reader.node(Reader::field(doc, "root", top), "/root");
  return model;
}

TreeModel parse_tree(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_tree(text);
}

std::string render_tree(const TreeModel& model) {
  std::ostringstream os;
  os << std::setprecision(6);
  struct Item {
    std::size_t node;
    int depth;
    std::string label;
  };
  std::vector<Item> stack{{0, 0, "root"}};
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    const auto& node = model.nodes[item.node];
    os << std::string(static_cast<std::size_t>(item.depth) * 2, ' ') << item.label << "  n="
       << node.sample_count << " wn=" << node.weighted_count;
    if (node.is_leaf) {
      os << " estimate=" << node.estimate << (node.dense ? "" : " (sparse)")
         << (node.no_valid_split ? " (no valid split)" : "") << '\n';
      continue;
    }
    os << (node.split_kind == SplitKind::mse ? "" : "  [median]") << '\n';
    std::ostringstream cut;
    cut << std::setprecision(6) << node.cutpoint;
    const auto& name = model.variable_names[node.variable];
    stack.push_back({static_cast<std::size_t>(node.right), item.depth + 1, name + " > " + cut.str()});
    stack.push_back({static_cast<std::size_t>(node.left), item.depth + 1, name + " <= " + cut.str()});
  }
  return os.str();
}

}  // namespace svytree
