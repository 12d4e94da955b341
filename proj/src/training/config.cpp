#include "cxr/training/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "cxr/error.hpp"

namespace cxr::training {

namespace {

// Any vocabulary above the reserved tokens; only used to validate shapes.
constexpr std::size_t kMinValidationVocab = 16;

struct Field {
  ConfigKey key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<nlohmann::json(const RunConfig&)> get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw UsageError("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) bad_value(key, value, "a non-negative integer");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  in.imbue(std::locale::classic());
  double out = 0;
  in >> out;
  if (in.fail() || !in.eof() || !std::isfinite(out)) bad_value(key, value, "a finite number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "a boolean");
}

template <typename T>
Field size_field(std::string name, std::string help, T RunConfig::*member) {
  const std::string key = name;
  return {{std::move(name), std::move(help)},
          [key, member](RunConfig& c, const std::string& v) { c.*member = static_cast<T>(parse_unsigned(key, v)); },
          [member](const RunConfig& c) { return nlohmann::json(c.*member); }};
}

Field double_field(std::string name, std::string help, double RunConfig::*member) {
  const std::string key = name;
  return {{std::move(name), std::move(help)},
          [key, member](RunConfig& c, const std::string& v) { c.*member = parse_double(key, v); },
          [member](const RunConfig& c) { return nlohmann::json(c.*member); }};
}

Field bool_field(std::string name, std::string help, bool RunConfig::*member) {
  const std::string key = name;
  return {{std::move(name), std::move(help)},
          [key, member](RunConfig& c, const std::string& v) { c.*member = parse_bool(key, v); },
          [member](const RunConfig& c) { return nlohmann::json(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    t.push_back({{"preset", "base values: toy or full (must be the first key)"},
                 [](RunConfig& c, const std::string& v) {
                   if (v != "toy" && v != "full") throw UsageError("unknown preset '" + v + "'");
                   c.preset = v;
                 },
                 [](const RunConfig& c) { return nlohmann::json(c.preset); }});
    t.push_back(size_field("seed", "master seed for initialization, ordering and sampling", &RunConfig::seed));
    t.push_back(size_field("image_size", "square input size in pixels", &RunConfig::image_size));
    t.push_back(size_field("patch_size", "patch edge in pixels", &RunConfig::patch_size));
    t.push_back(size_field("encoder_layers", "image encoder blocks", &RunConfig::encoder_layers));
    t.push_back(size_field("encoder_width", "image encoder width", &RunConfig::encoder_width));
    t.push_back(size_field("encoder_heads", "image encoder attention heads", &RunConfig::encoder_heads));
    t.push_back(size_field("decoder_layers", "text decoder blocks", &RunConfig::decoder_layers));
    t.push_back(size_field("decoder_width", "text decoder width", &RunConfig::decoder_width));
    t.push_back(size_field("decoder_heads", "text decoder attention heads", &RunConfig::decoder_heads));
    t.push_back(size_field("mlp_ratio", "feed-forward width multiple", &RunConfig::mlp_ratio));
    t.push_back(size_field("max_text_len", "decoder positions incl. BOS/SEP/EOS", &RunConfig::max_text_len));
    t.push_back(size_field("max_context_tokens", "context prompt cap", &RunConfig::max_context_tokens));
    t.push_back(size_field("batch_size", "samples per optimizer step", &RunConfig::batch_size));
    t.push_back(double_field("learning_rate", "AdamW peak learning rate", &RunConfig::learning_rate));
    t.push_back({{"lr_schedule", "constant, or cosine (linear warmup then cosine decay to 0)"},
                 [](RunConfig& c, const std::string& v) {
                   if (v != "constant" && v != "cosine") throw UsageError("unknown lr_schedule '" + v + "'");
                   c.lr_schedule = v;
                 },
                 [](const RunConfig& c) { return nlohmann::json(c.lr_schedule); }});
    t.push_back(double_field("warmup_fraction", "share of steps spent warming up (cosine only)",
                             &RunConfig::warmup_fraction));
    t.push_back(double_field("weight_decay", "AdamW decoupled weight decay", &RunConfig::weight_decay));
    t.push_back(size_field("base_epochs", "N_e, epochs over the full training set", &RunConfig::base_epochs));
    t.push_back(size_field("patience", "validations without improvement before stopping", &RunConfig::patience));
    t.push_back(double_field("cls_weight", "weight of the classification loss", &RunConfig::cls_weight));
    t.push_back(size_field("val_samples", "validation subsample cap", &RunConfig::val_samples));
    t.push_back(size_field("beam_size", "beam width for the final test decoding (1 = greedy)", &RunConfig::beam_size));
    t.push_back(size_field("test_samples", "test subsample cap after training (0 = all)", &RunConfig::test_samples));
    t.push_back(bool_field("curriculum", "length curriculum on/off", &RunConfig::curriculum));
    t.push_back(size_field("bins", "curriculum bins b", &RunConfig::bins));
    t.push_back(double_field("fraction", "curriculum fraction f sampled per epoch", &RunConfig::fraction));
    t.push_back(bool_field("classifier", "multi-label classification head on/off", &RunConfig::classifier));
    t.push_back(size_field("num_views", "1 (single frontal view) or 2 (view pairs)", &RunConfig::num_views));
    t.push_back(bool_field("use_context", "feed indication/history as a prompt", &RunConfig::use_context));
    return t;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key.name == key) return f;
  }
  throw UsageError("unknown config key '" + key + "'");
}

std::string json_scalar_text(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return v.dump();
  throw UsageError("config key '" + key + "' must hold a scalar");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("invalid config: " + what);
  };
  require(batch_size >= 1, "batch_size must be >= 1");
  require(learning_rate > 0, "learning_rate must be > 0");
  require(warmup_fraction >= 0 && warmup_fraction < 1, "warmup_fraction must be in [0, 1)");
  require(weight_decay >= 0, "weight_decay must be >= 0");
  require(base_epochs >= 1, "base_epochs must be >= 1");
  require(patience >= 1, "patience must be >= 1");
  require(cls_weight >= 0, "cls_weight must be >= 0");
  require(val_samples >= 1, "val_samples must be >= 1");
  require(beam_size >= 1, "beam_size must be >= 1");
  require(bins >= 1, "bins must be >= 1");
  require(fraction > 0 && fraction <= 1, "fraction must be in (0, 1]");
  require(num_views == 1 || num_views == 2, "num_views must be 1 or 2");
  require(max_context_tokens + 4 <= max_text_len, "max_context_tokens leaves no room for the report");
  model_config(kMinValidationVocab).validate();
}

model::ModelConfig RunConfig::model_config(std::size_t vocab_size) const {
  model::ModelConfig m;
  m.image_size = image_size;
  m.patch_size = patch_size;
  m.encoder_layers = encoder_layers;
  m.encoder_width = encoder_width;
  m.encoder_heads = encoder_heads;
  m.decoder_layers = decoder_layers;
  m.decoder_width = decoder_width;
  m.decoder_heads = decoder_heads;
  m.mlp_ratio = mlp_ratio;
  m.vocab_size = vocab_size;
  m.max_text_len = max_text_len;
  m.num_views = num_views;
  m.classifier = classifier;
  return m;
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  if (name == "toy") return c;
  if (name != "full") throw UsageError("unknown preset '" + name + "'");
  c.preset = "full";
  c.image_size = 224;
  c.patch_size = 16;
  c.encoder_layers = 12;
  c.encoder_width = 768;
  c.encoder_heads = 12;
  c.decoder_layers = 6;
  c.decoder_width = 768;
  c.decoder_heads = 12;
  c.batch_size = 32;
  c.learning_rate = 5e-5;
  c.weight_decay = 0.01;
  c.base_epochs = 30;
  c.patience = 7;
  c.cls_weight = 0.1;
  c.bins = 10;
  c.fraction = 0.25;
  return c;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "preset") {
    config = preset_config(value);
    return;
  }
  find_field(key).set(config, value);
}

RunConfig parse_run_config(const std::string& text) {
  const std::string body = trim(text);
  RunConfig config;
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    return run_config_from_json(j);
  }
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool any_key = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "preset" && any_key) {
      throw UsageError("config line " + std::to_string(lineno) + ": preset must be the first key");
    }
    try {
      set_config_value(config, key, value);
    } catch (const UsageError& e) {
      throw UsageError("config line " + std::to_string(lineno) + ": " + e.what());
    }
    any_key = true;
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::string& name_or_path) {
  if (name_or_path == "toy" || name_or_path == "full") return preset_config(name_or_path);
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) throw UsageError("cannot open config file " + name_or_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

nlohmann::json to_json(const RunConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) j[f.key.name] = f.get(config);
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config JSON must be an object");
  RunConfig config;
  if (j.contains("preset")) config = preset_config(json_scalar_text("preset", j.at("preset")));
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") continue;
    set_config_value(config, key, json_scalar_text(key, value));
  }
  config.validate();
  return config;
}

std::string to_text(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& f : fields()) {
    const nlohmann::json v = f.get(config);
    out << f.key.name << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  return out.str();
}

}  // namespace cxr::training
