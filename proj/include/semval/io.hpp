#pragma once

// File formats. All writers are deterministic: same inputs produce the same
// bytes, so reruns can be diffed directly. No timestamps, no environment
// capture.
//
// Label batches are JSON Lines: a header object on the first line, one record
// per line after it. Missing label coordinates (NaN) are stored as null.
// Checkpoints are a single JSON object. Doubles survive a save/load round trip
// bit for bit; NaN maps to null and back.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semval/amortize.hpp"
#include "semval/record.hpp"

namespace semval {

struct LabelFile {
  std::string task;
  std::string method;
  std::string game_fingerprint;
  std::uint64_t base_seed = 0;
  int label_dim = 0;
  std::vector<NoisyLabelRecord> records;
};

void save_label_file(const std::string& path, const LabelFile& file);
LabelFile load_label_file(const std::string& path);

struct Checkpoint {
  AmortizedModel model;
  std::map<std::string, std::string> meta;  // free-form, e.g. task or method
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Shortest decimal form that parses back to the same double. NaN and
// infinities spell as "nan", "inf", "-inf".
std::string format_double(double value);

// Minimal CSV with RFC-style quoting. Every row must match the header width.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace semval
