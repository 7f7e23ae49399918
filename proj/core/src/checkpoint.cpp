#include "strokegestalt/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <torch/torch.h>

#include "strokegestalt/error.hpp"
#include "strokegestalt/hash.hpp"

namespace fs = std::filesystem;

namespace strokegestalt {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little endian");

namespace {

constexpr char kMagic[8] = {'S', 'G', 'C', 'K', 'P', 'T', '0', '1'};

torch::Tensor as_cpu_float(const torch::Tensor& t) {
  return t.detach().to(torch::kCPU, torch::kFloat32).contiguous();
}

}  // namespace

const torch::Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw CheckpointError("checkpoint has no tensor named " + name);
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  nlohmann::json index = nlohmann::json::array();
  uint64_t offset = 0;
  std::vector<torch::Tensor> data;
  for (const auto& [name, t] : ckpt.tensors) {
    auto c = as_cpu_float(t);
    const uint64_t nbytes = static_cast<uint64_t>(c.numel()) * sizeof(float);
    index.push_back({{"name", name}, {"dtype", "float32"}, {"shape", c.sizes().vec()}, {"offset", offset},
                     {"nbytes", nbytes}});
    offset += nbytes;
    data.push_back(std::move(c));
  }
  const nlohmann::json header{{"kind", ckpt.kind},
                              {"config", ckpt.config},
                              {"metadata", ckpt.metadata},
                              {"tensors", index}};
  const std::string hs = header.dump();

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    const uint64_t len = hs.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& t : data) {
      out.write(reinterpret_cast<const char*>(t.data_ptr<float>()),
                static_cast<std::streamsize>(t.numel() * sizeof(float)));
    }
    if (!out) throw CheckpointError("I/O failure writing checkpoint: " + path.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a strokegestalt checkpoint: " + path.string());
  }
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (uint64_t{1} << 32)) throw CheckpointError("corrupt checkpoint header: " + path.string());
  std::string hs(len, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(len));
  if (!in) throw CheckpointError("truncated checkpoint header: " + path.string());

  const auto header = nlohmann::json::parse(hs);
  Checkpoint ckpt;
  ckpt.kind = header.at("kind").get<std::string>();
  ckpt.config = header.at("config");
  ckpt.metadata = header.at("metadata");
  const auto data_start = in.tellg();
  for (const auto& e : header.at("tensors")) {
    if (e.at("dtype").get<std::string>() != "float32") throw CheckpointError("unsupported dtype in checkpoint");
    const auto shape = e.at("shape").get<std::vector<int64_t>>();
    const auto offset = e.at("offset").get<uint64_t>();
    const auto nbytes = e.at("nbytes").get<uint64_t>();
    auto t = torch::empty(shape, torch::kFloat32);
    if (static_cast<uint64_t>(t.numel()) * sizeof(float) != nbytes) {
      throw CheckpointError("tensor size mismatch for " + e.at("name").get<std::string>());
    }
    in.seekg(data_start + static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(t.data_ptr<float>()), static_cast<std::streamsize>(nbytes));
    if (!in) throw CheckpointError("truncated tensor data in " + path.string());
    ckpt.tensors.emplace_back(e.at("name").get<std::string>(), std::move(t));
  }
  return ckpt;
}

std::vector<std::pair<std::string, torch::Tensor>> module_state(const torch::nn::Module& module) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& p : module.named_parameters(/*recurse=*/true)) out.emplace_back(p.key(), as_cpu_float(p.value()).clone());
  for (const auto& b : module.named_buffers(/*recurse=*/true)) {
    if (!b.value().is_floating_point()) continue;  // BN's num_batches_tracked
    out.emplace_back(b.key(), as_cpu_float(b.value()).clone());
  }
  return out;
}

void load_module_state(torch::nn::Module& module, const std::vector<std::pair<std::string, torch::Tensor>>& state) {
  torch::NoGradGuard no_grad;
  auto params = module.named_parameters(true);
  auto buffers = module.named_buffers(true);
  size_t expected = params.size();
  for (const auto& b : buffers) expected += b.value().is_floating_point() ? 1 : 0;
  if (state.size() != expected) {
    throw CheckpointError("checkpoint has " + std::to_string(state.size()) + " tensors, module expects " +
                          std::to_string(expected));
  }
  for (const auto& [name, t] : state) {
    torch::Tensor* dst = params.find(name);
    if (dst == nullptr) dst = buffers.find(name);
    if (dst == nullptr) throw CheckpointError("module has no tensor named " + name);
    if (dst->sizes() != t.sizes()) throw CheckpointError("shape mismatch for " + name);
    dst->copy_(t);
  }
}

std::string state_hash(const std::vector<std::pair<std::string, torch::Tensor>>& state) {
  Sha256 h;
  for (const auto& [name, t] : state) {
    auto c = as_cpu_float(t);
    h.update(name);
    for (auto d : c.sizes()) h.update(std::to_string(d) + ",");
    h.update(std::span(reinterpret_cast<const std::byte*>(c.data_ptr<float>()), c.numel() * sizeof(float)));
  }
  return h.hex_digest();
}

std::string parameter_hash(const torch::nn::Module& module) { return state_hash(module_state(module)); }

}  // namespace strokegestalt
