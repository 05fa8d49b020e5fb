#include "cyclegan/config_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cyclegan/errors.hpp"

namespace cyclegan {

namespace {

struct Context {
  std::set<std::string> overridden;
  std::map<std::string, int> lines;

  bool from_override(const std::string& path) const {
    for (const auto& key : overridden) {
      if (path == key || path.rfind(key + ".", 0) == 0) return true;
    }
    return false;
  }

  int line_of(const std::string& path, const YAML::Node& node) const {
    if (from_override(path)) return 0;
    if (node.Mark().is_null()) return -1;
    return node.Mark().line + 1;
  }

  int line_for_field(std::string field) const {
    if (auto bracket = field.find('['); bracket != std::string::npos) field.resize(bracket);
    while (!field.empty()) {
      if (auto it = lines.find(field); it != lines.end()) return it->second;
      if (from_override(field)) return 0;
      auto dot = field.rfind('.');
      if (dot == std::string::npos) break;
      field.resize(dot);
    }
    return -1;
  }
};

std::string shortest(double value) {
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

class Section {
 public:
  Section(YAML::Node node, std::string prefix, Context& ctx)
      : node_(std::move(node)), prefix_(std::move(prefix)), ctx_(ctx) {}

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  bool has(const std::string& key) const { return node_[key].IsDefined(); }

  YAML::Node raw(const std::string& key) {
    YAML::Node value = node_[key];
    ctx_.lines[path(key)] = ctx_.line_of(path(key), value);
    return value;
  }

  [[noreturn]] void fail(const std::string& key, const YAML::Node& value, const std::string& message) const {
    throw ParseError(path(key), ctx_.line_of(path(key), value), message);
  }

  template <class T>
  void read(const std::string& key, T& out, const char* expected) {
    if (!has(key)) return;
    YAML::Node value = raw(key);
    if (!value.IsScalar()) fail(key, value, std::string("expected ") + expected);
    try {
      out = value.as<T>();
    } catch (const YAML::Exception&) {
      fail(key, value, std::string("expected ") + expected + ", got '" + value.Scalar() + "'");
    }
  }

  void read_int(const std::string& key, int& out) { read(key, out, "an integer"); }
  void read_double(const std::string& key, double& out) { read(key, out, "a number"); }
  void read_u64(const std::string& key, uint64_t& out) { read(key, out, "a non-negative integer"); }

  template <class Parse>
  void read_enum(const std::string& key, Parse parse) {
    if (!has(key)) return;
    std::string text;
    read(key, text, "a string");
    try {
      parse(text);
    } catch (const ConfigError& e) {
      fail(key, node_[key], e.what());
    }
  }

  void read_int_list(const std::string& key, std::vector<int>& out) {
    if (!has(key)) return;
    YAML::Node value = raw(key);
    if (!value.IsSequence()) fail(key, value, "expected a list of integers");
    std::vector<int> parsed;
    for (std::size_t i = 0; i < value.size(); ++i) {
      try {
        parsed.push_back(value[i].as<int>());
      } catch (const YAML::Exception&) {
        fail(key, value[i], "element " + std::to_string(i) + " is not an integer");
      }
    }
    out = std::move(parsed);
  }

  std::optional<Section> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    YAML::Node value = raw(key);
    if (value.IsNull()) return Section(YAML::Node(YAML::NodeType::Map), path(key), ctx_);
    if (!value.IsMap()) fail(key, value, "expected a section (mapping)");
    return Section(value, path(key), ctx_);
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    for (const auto& entry : node_) {
      const std::string key = entry.first.as<std::string>();
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) throw ParseError(path(key), ctx_.line_of(path(key), entry.first), "unknown key");
    }
  }

 private:
  YAML::Node node_;
  std::string prefix_;
  Context& ctx_;
};

void apply_override(YAML::Node& root, const std::string& text, Context& ctx) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError(text, 0, "override must have the form key=value");
  const std::string key = text.substr(0, eq);
  const std::string value = text.substr(eq + 1);

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ParseError(key, 0, "empty component in key path");
    parts.push_back(part);
  }
  if (parts.empty()) throw ParseError(key, 0, "empty key");

  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception&) {
    parsed = YAML::Node(value);
  }

  YAML::Node cur(root);
  std::string walked;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    walked += (walked.empty() ? "" : ".") + parts[i];
    YAML::Node next = cur[parts[i]];
    if (!next.IsDefined() || next.IsNull()) {
      cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next.reset(cur[parts[i]]);
    } else if (!next.IsMap()) {
      throw ParseError(walked, 0, "is not a section");
    }
    cur.reset(next);
  }
  cur[parts.back()] = parsed;
  ctx.overridden.insert(key);
}

void read_generator(Section s, GeneratorSpec& g) {
  s.reject_unknown({"in_channels", "encoder_channels", "n_residual_blocks", "decoder_channels", "out_channels",
                    "norm_kind"});
  s.read_int("in_channels", g.in_channels);
  s.read_int_list("encoder_channels", g.encoder_channels);
  s.read_int("n_residual_blocks", g.n_residual_blocks);
  s.read_int_list("decoder_channels", g.decoder_channels);
  s.read_int("out_channels", g.out_channels);
  s.read_enum("norm_kind", [&](const std::string& t) { g.norm_kind = norm_kind_from_string(t); });
}

void read_discriminator(Section s, DiscriminatorSpec& d) {
  s.reject_unknown({"in_channels", "layer_channels", "kernel_size", "strides", "final_stride", "leaky_slope",
                    "norm_kind"});
  s.read_int("in_channels", d.in_channels);
  s.read_int_list("layer_channels", d.layer_channels);
  s.read_int("kernel_size", d.kernel_size);
  s.read_int_list("strides", d.strides);
  s.read_int("final_stride", d.final_stride);
  s.read_double("leaky_slope", d.leaky_slope);
  s.read_enum("norm_kind", [&](const std::string& t) { d.norm_kind = norm_kind_from_string(t); });
}

void emit_train(YAML::Emitter& out, const TrainConfig& c) {
  if (c.preset) out << YAML::Key << "preset" << YAML::Value << std::string(to_string(*c.preset));
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "lambda_cyc" << YAML::Value << shortest(c.lambda_cyc);
  out << YAML::Key << "gan_mode" << YAML::Value << std::string(to_string(c.gan_mode));
  out << YAML::Key << "buffer_capacity" << YAML::Value << c.buffer_capacity;
  out << YAML::Key << "batch_size" << YAML::Value << c.batch_size;
  out << YAML::Key << "checkpoint_every" << YAML::Value << c.checkpoint_every;
  out << YAML::Key << "image_size" << YAML::Value << c.image_size;

  out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "learning_rate" << YAML::Value << shortest(c.optimizer.learning_rate);
  out << YAML::Key << "beta1" << YAML::Value << shortest(c.optimizer.beta1);
  out << YAML::Key << "beta2" << YAML::Value << shortest(c.optimizer.beta2);
  out << YAML::Key << "epsilon" << YAML::Value << shortest(c.optimizer.epsilon);
  out << YAML::EndMap;

  out << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "constant_epochs" << YAML::Value << c.schedule.constant_epochs;
  out << YAML::Key << "total_epochs" << YAML::Value << c.schedule.total_epochs;
  out << YAML::EndMap;

  const auto& g = c.generator;
  out << YAML::Key << "generator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "in_channels" << YAML::Value << g.in_channels;
  out << YAML::Key << "encoder_channels" << YAML::Value << YAML::Flow << g.encoder_channels;
  out << YAML::Key << "n_residual_blocks" << YAML::Value << g.n_residual_blocks;
  out << YAML::Key << "decoder_channels" << YAML::Value << YAML::Flow << g.decoder_channels;
  out << YAML::Key << "out_channels" << YAML::Value << g.out_channels;
  out << YAML::Key << "norm_kind" << YAML::Value << std::string(to_string(g.norm_kind));
  out << YAML::EndMap;

  const auto& d = c.discriminator;
  out << YAML::Key << "discriminator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "in_channels" << YAML::Value << d.in_channels;
  out << YAML::Key << "layer_channels" << YAML::Value << YAML::Flow << d.layer_channels;
  out << YAML::Key << "kernel_size" << YAML::Value << d.kernel_size;
  out << YAML::Key << "strides" << YAML::Value << YAML::Flow << d.strides;
  out << YAML::Key << "final_stride" << YAML::Value << d.final_stride;
  out << YAML::Key << "leaky_slope" << YAML::Value << shortest(d.leaky_slope);
  out << YAML::Key << "norm_kind" << YAML::Value << std::string(to_string(d.norm_kind));
  out << YAML::EndMap;
}

}  // namespace

RunSettings parse_run_settings(const std::string& yaml_text, const std::vector<std::string>& overrides) {
  Context ctx;
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("<document>", e.mark.line + 1, e.msg);
  }
  if (!root.IsDefined() || root.IsNull()) {
    root = YAML::Node(YAML::NodeType::Map);
  } else if (!root.IsMap()) {
    throw ParseError("<document>", root.Mark().line + 1, "expected a mapping at the top level");
  }
  for (const auto& o : overrides) apply_override(root, o, ctx);

  RunSettings settings;
  TrainConfig& c = settings.train;
  Section top(root, "", ctx);
  top.reject_unknown({"preset", "seed", "lambda_cyc", "gan_mode", "buffer_capacity", "batch_size",
                      "checkpoint_every", "image_size", "optimizer", "schedule", "generator", "discriminator",
                      "dataset_root", "output_dir"});

  top.read_enum("preset", [&](const std::string& t) {
    c.preset = preset_from_string(t);
    c.schedule = preset_schedule(*c.preset);
  });
  top.read_u64("seed", c.seed);
  top.read_double("lambda_cyc", c.lambda_cyc);
  top.read_enum("gan_mode", [&](const std::string& t) { c.gan_mode = gan_mode_from_string(t); });
  top.read_int("buffer_capacity", c.buffer_capacity);
  top.read_int("batch_size", c.batch_size);
  top.read_int("checkpoint_every", c.checkpoint_every);
  top.read_int("image_size", c.image_size);

  if (auto s = top.child("optimizer")) {
    s->reject_unknown({"learning_rate", "beta1", "beta2", "epsilon"});
    s->read_double("learning_rate", c.optimizer.learning_rate);
    s->read_double("beta1", c.optimizer.beta1);
    s->read_double("beta2", c.optimizer.beta2);
    s->read_double("epsilon", c.optimizer.epsilon);
  }
  if (auto s = top.child("schedule")) {
    s->reject_unknown({"constant_epochs", "total_epochs"});
    s->read_int("constant_epochs", c.schedule.constant_epochs);
    s->read_int("total_epochs", c.schedule.total_epochs);
  }
  if (auto s = top.child("generator")) read_generator(*s, c.generator);
  if (auto s = top.child("discriminator")) read_discriminator(*s, c.discriminator);

  std::string text;
  if (top.has("dataset_root")) {
    top.read("dataset_root", text, "a path");
    settings.dataset_root = text;
  }
  if (top.has("output_dir")) {
    top.read("output_dir", text, "a path");
    settings.output_dir = text;
  } else if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0') {
    settings.output_dir = env;
  } else {
    settings.output_dir = "runs";
  }

  try {
    c.validate();
  } catch (const ConfigError& e) {
    std::string message = e.what();
    const std::string lead = e.field() + ": ";
    if (message.rfind(lead, 0) == 0) message = message.substr(lead.size());
    throw ParseError(e.field(), ctx.line_for_field(e.field()), message);
  }
  return settings;
}

RunSettings parse_run_settings_file(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string(), -1, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_settings(text.str(), overrides);
}

TrainConfig parse_config(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  return parse_run_settings_file(file, overrides).train;
}

std::string emit_config(const RunSettings& settings) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  emit_train(out, settings.train);
  if (settings.dataset_root) out << YAML::Key << "dataset_root" << YAML::Value << settings.dataset_root->string();
  out << YAML::Key << "output_dir" << YAML::Value << settings.output_dir.string();
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string emit_config(const TrainConfig& config) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  emit_train(out, config);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::filesystem::path write_effective_config(const RunSettings& settings, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / kEffectiveConfigName;
  std::ofstream out(path);
  out << emit_config(settings);
  if (!out) throw FormatError("cannot write " + path.string());
  return path;
}

}  // namespace cyclegan
