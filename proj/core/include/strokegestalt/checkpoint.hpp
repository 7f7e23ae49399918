#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/nn/module.h>
#include <torch/types.h>

namespace strokegestalt {

/// Serialized model: architecture config, named tensors, training metadata.
///
/// On-disk layout (little endian):
///   8 bytes   magic "SGCKPT01"
///   u64       header length N
///   N bytes   UTF-8 JSON {"kind", "config", "metadata", "tensors": [
///               {"name", "dtype": "float32", "shape", "offset", "nbytes"}]}
///   ...       raw tensor data, offsets relative to the end of the header
struct Checkpoint {
  std::string kind;  // "recognizer" or "sr"
  nlohmann::json config;
  nlohmann::json metadata;
  std::vector<std::pair<std::string, torch::Tensor>> tensors;

  const torch::Tensor& tensor(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Parameters then buffers, in registration order, detached float32 copies.
std::vector<std::pair<std::string, torch::Tensor>> module_state(const torch::nn::Module& module);

/// Copies tensors into a module's parameters and buffers. Names and shapes
/// must match exactly.
void load_module_state(torch::nn::Module& module, const std::vector<std::pair<std::string, torch::Tensor>>& state);

/// SHA-256 over every parameter and buffer (name, shape, raw bytes).
std::string parameter_hash(const torch::nn::Module& module);
std::string state_hash(const std::vector<std::pair<std::string, torch::Tensor>>& state);

}  // namespace strokegestalt
