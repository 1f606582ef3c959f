#pragma once

// Versioned text checkpoints: template, preprocessing state and the flat
// parameter vector of every model of an ensemble.
//
//   hql-checkpoint v1
//   template arch=simple-a fsim=... conv=none
//   dataset cancer
//   selector named 4
//   column <index> <name>          (one line per selected column)
//   standardizer <mean> <scale>    (one line per selected column)
//   classes <k> <id>...
//   model <class id> <n> <p1> ... <pn>

#include <filesystem>
#include <string>

#include "hql/circuits.hpp"
#include "hql/dataset.hpp"
#include "hql/encoding.hpp"
#include "hql/multiclass.hpp"

namespace hql::ckpt {

inline constexpr const char* kMagic = "hql-checkpoint";
inline constexpr int kVersion = 1;

struct Checkpoint {
  std::string template_description;
  data::DatasetName dataset = data::DatasetName::Parity;
  enc::Preprocessor preprocessor;
  mc::Ensemble ensemble;
};

std::string to_text(const Checkpoint& ckpt);

/// Throws DataError on a wrong magic line, unsupported version, malformed
/// lines or parameter counts that do not fit the template.
Checkpoint parse(const std::string& text);

void save(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load(const std::filesystem::path& path);

/// Throws ConfigError if the checkpoint was written for another template.
void require_template(const Checkpoint& ckpt, const pqc::CircuitTemplate& tmpl);

}  // namespace hql::ckpt
