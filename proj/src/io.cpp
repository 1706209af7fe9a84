#include "semval/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "semval/errors.hpp"
#include "semval/version.hpp"

namespace semval {

using json = nlohmann::json;

namespace {

constexpr const char* kLabelsKind = "semval.labels";
constexpr const char* kCheckpointKind = "semval.checkpoint";

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw InvalidArgument("cannot open for writing: " + path);
  return out;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw InvalidArgument("cannot open for reading: " + path);
  return in;
}

json parse_line(const std::string& line, const std::string& path) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument("malformed JSON in " + path);
  return j;
}

json label_to_json(const std::vector<double>& label) {
  json arr = json::array();
  for (double v : label) {
    if (NoisyLabelRecord::is_missing(v)) {
      arr.push_back(nullptr);
    } else {
      arr.push_back(v);
    }
  }
  return arr;
}

std::vector<double> label_from_json(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw InvalidArgument("label is not an array in " + path);
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (v.is_null()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      throw InvalidArgument("label entry is not a number in " + path);
    }
  }
  return out;
}

std::vector<double> doubles_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw InvalidArgument(what + " is not an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (v.is_null()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.push_back(v.get<double>());
    }
  }
  return out;
}

}  // namespace

void save_label_file(const std::string& path, const LabelFile& file) {
  std::ofstream out = open_for_write(path);
  json header = {
      {"kind", kLabelsKind},          {"version", kVersion},
      {"task", file.task},            {"method", file.method},
      {"game_fingerprint", file.game_fingerprint},
      {"base_seed", file.base_seed},  {"label_dim", file.label_dim},
  };
  out << header.dump() << '\n';
  for (const NoisyLabelRecord& rec : file.records) {
    json j = {
        {"context_id", rec.context_id}, {"method", rec.method},
        {"num_samples", rec.num_samples}, {"seed", rec.seed},
        {"label", label_to_json(rec.label)}, {"evals_used", rec.evals_used},
        {"partial", rec.partial}, {"biased", rec.biased}, {"failed", rec.failed},
    };
    if (!rec.error.empty()) j["error"] = rec.error;
    out << j.dump() << '\n';
  }
  if (!out.good()) throw InvalidArgument("write failed: " + path);
}

LabelFile load_label_file(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty label file: " + path);
  const json header = parse_line(line, path);
  if (header.value("kind", std::string()) != kLabelsKind) {
    throw InvalidArgument("not a label file: " + path);
  }
  LabelFile file;
  try {
    file.task = header.value("task", std::string());
    file.method = header.value("method", std::string());
    file.game_fingerprint = header.value("game_fingerprint", std::string());
    file.base_seed = header.value("base_seed", std::uint64_t{0});
    file.label_dim = header.value("label_dim", 0);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = parse_line(line, path);
      NoisyLabelRecord rec;
      rec.context_id = j.value("context_id", std::string());
      rec.method = j.value("method", std::string());
      rec.num_samples = j.value("num_samples", 0);
      rec.seed = j.value("seed", std::uint64_t{0});
      rec.label = label_from_json(j.at("label"), path);
      rec.evals_used = j.value("evals_used", std::uint64_t{0});
      rec.partial = j.value("partial", false);
      rec.biased = j.value("biased", false);
      rec.failed = j.value("failed", false);
      rec.error = j.value("error", std::string());
      file.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed label file " + path + ": " + e.what());
  }
  return file;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const AmortizedModel& m = ckpt.model;
  json j = {
      {"kind", kCheckpointKind},
      {"version", kVersion},
      {"model",
       {
           {"kind", m.cfg.kind == ModelKind::kLinear ? "linear" : "mlp"},
           {"input_dim", m.cfg.input_dim},
           {"output_dim", m.cfg.output_dim},
           {"hidden", m.cfg.hidden},
           {"use_bias", m.cfg.use_bias},
           {"per_class_head", m.cfg.per_class_head},
           {"label_scale", m.label_scale},
           {"w", m.w},
           {"bias", m.bias},
           {"w1", m.w1},
           {"b1", m.b1},
           {"w2", m.w2},
           {"b2", m.b2},
       }},
      {"meta", ckpt.meta},
  };
  std::ofstream out = open_for_write(path);
  out << j.dump(2) << '\n';
  if (!out.good()) throw InvalidArgument("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const json j = parse_line(buf.str(), path);
  if (j.value("kind", std::string()) != kCheckpointKind) {
    throw InvalidArgument("not a checkpoint file: " + path);
  }
  Checkpoint ckpt;
  AmortizedModel& m = ckpt.model;
  try {
    const json& jm = j.at("model");
    const std::string kind = jm.value("kind", std::string());
    if (kind == "linear") {
      m.cfg.kind = ModelKind::kLinear;
    } else if (kind == "mlp") {
      m.cfg.kind = ModelKind::kMlp;
    } else {
      throw InvalidArgument("unknown model kind '" + kind + "' in " + path);
    }
    m.cfg.input_dim = jm.value("input_dim", 0);
    m.cfg.output_dim = jm.value("output_dim", 0);
    m.cfg.hidden = jm.value("hidden", 0);
    m.cfg.use_bias = jm.value("use_bias", false);
    m.cfg.per_class_head = jm.value("per_class_head", false);
    m.label_scale = jm.value("label_scale", 1.0);
    m.w = doubles_from_json(jm.at("w"), "w");
    m.bias = doubles_from_json(jm.at("bias"), "bias");
    m.w1 = doubles_from_json(jm.at("w1"), "w1");
    m.b1 = doubles_from_json(jm.at("b1"), "b1");
    m.w2 = doubles_from_json(jm.at("w2"), "w2");
    m.b2 = doubles_from_json(jm.at("b2"), "b2");
    if (j.contains("meta")) {
      ckpt.meta = j.at("meta").get<std::map<std::string, std::string>>();
    }
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed checkpoint " + path + ": " + e.what());
  }
  const std::size_t d = static_cast<std::size_t>(m.cfg.input_dim);
  const std::size_t out_dim = static_cast<std::size_t>(m.cfg.output_dim);
  if (m.cfg.kind == ModelKind::kLinear) {
    if (m.w.size() != d * out_dim) throw InvalidArgument("checkpoint weight shape mismatch: " + path);
  } else {
    const std::size_t h = static_cast<std::size_t>(m.cfg.hidden);
    if (m.w1.size() != h * d || m.w2.size() != out_dim * h || m.b1.size() != h ||
        m.b2.size() != out_dim) {
      throw InvalidArgument("checkpoint weight shape mismatch: " + path);
    }
  }
  return ckpt;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out = open_for_write(path);
  const auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << csv_escape(row[i]);
    }
    out << '\n';
  };
  write_row(header);
  for (const std::vector<std::string>& row : rows) {
    if (row.size() != header.size()) {
      throw InvalidArgument("csv row width does not match header: " + path);
    }
    write_row(row);
  }
  if (!out.good()) throw InvalidArgument("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_for_write(path);
  out << content;
  if (!out.good()) throw InvalidArgument("write failed: " + path);
}

}  // namespace semval
