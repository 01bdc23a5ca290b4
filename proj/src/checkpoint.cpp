#include "egonav/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "egonav/error.hpp"

namespace egonav {

namespace fs = std::filesystem;

void save_tensors(const std::string& dir, const NamedTensors& tensors) {
  fs::create_directories(dir);
  std::ofstream bin(fs::path(dir) / "tensors.bin", std::ios::binary);
  std::ofstream man(fs::path(dir) / "manifest.txt");
  if (!bin || !man) throw IoFailure("cannot write checkpoint in " + dir);
  std::size_t offset = 0;
  for (const auto& [name, t] : tensors) {
    if (name.find_first_of(" \n") != std::string::npos) throw IoFailure("bad tensor name: " + name);
    const torch::Tensor c = t.detach().to(torch::kCPU, torch::kFloat32).contiguous();
    man << name << ' ' << c.dim();
    for (auto d : c.sizes()) man << ' ' << d;
    man << ' ' << offset << '\n';
    const auto bytes = static_cast<std::size_t>(c.numel()) * sizeof(float);
    bin.write(reinterpret_cast<const char*>(c.data_ptr<float>()), static_cast<std::streamsize>(bytes));
    offset += bytes;
  }
  if (!bin || !man) throw IoFailure("checkpoint write failed in " + dir);
}

std::map<std::string, torch::Tensor> load_tensors(const std::string& dir) {
  std::ifstream man(fs::path(dir) / "manifest.txt");
  std::ifstream bin(fs::path(dir) / "tensors.bin", std::ios::binary);
  if (!man || !bin) throw IoFailure("no checkpoint at " + dir);
  std::map<std::string, torch::Tensor> out;
  std::string line;
  while (std::getline(man, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name;
    int rank = 0;
    if (!(ls >> name >> rank) || rank < 0 || rank > 8) throw ParseError("bad manifest line: " + line);
    std::vector<int64_t> shape(static_cast<std::size_t>(rank));
    for (auto& d : shape) {
      if (!(ls >> d) || d < 0) throw ParseError("bad manifest shape: " + line);
    }
    std::size_t offset = 0;
    if (!(ls >> offset)) throw ParseError("bad manifest offset: " + line);
    torch::Tensor t = torch::empty(shape, torch::kFloat32);
    bin.seekg(static_cast<std::streamoff>(offset));
    bin.read(reinterpret_cast<char*>(t.data_ptr<float>()),
             static_cast<std::streamsize>(static_cast<std::size_t>(t.numel()) * sizeof(float)));
    if (!bin) throw ParseError("truncated checkpoint payload for " + name);
    out.emplace(name, t);
  }
  return out;
}

NamedTensors module_tensors(const torch::nn::Module& module, const std::string& prefix) {
  NamedTensors out;
  for (const auto& p : module.named_parameters(true)) out.emplace_back(prefix + p.key(), p.value());
  for (const auto& b : module.named_buffers(true)) out.emplace_back(prefix + b.key(), b.value());
  return out;
}

void load_module_tensors(torch::nn::Module& module, const std::map<std::string, torch::Tensor>& src,
                         const std::string& prefix) {
  torch::NoGradGuard guard;
  const auto copy = [&](const std::string& key, torch::Tensor& dst) {
    const auto it = src.find(prefix + key);
    if (it == src.end()) throw ParseError("checkpoint lacks tensor " + prefix + key);
    if (it->second.sizes() != dst.sizes()) throw ShapeMismatch("checkpoint tensor " + prefix + key);
    dst.copy_(it->second);
  };
  for (auto& p : module.named_parameters(true)) copy(p.key(), p.value());
  for (auto& b : module.named_buffers(true)) copy(b.key(), b.value());
}

}  // namespace egonav
