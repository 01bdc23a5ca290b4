#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

namespace egonav {

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

// Tensor archive: <dir>/tensors.bin holds little-endian float32 payloads back to
// back; <dir>/manifest.txt has one line per tensor: `name rank d0 d1 ... offset`.
void save_tensors(const std::string& dir, const NamedTensors& tensors);
std::map<std::string, torch::Tensor> load_tensors(const std::string& dir);

/// Parameters and buffers of `module`, names prefixed with `prefix`.
NamedTensors module_tensors(const torch::nn::Module& module, const std::string& prefix);
/// Copies matching tensors into `module`; throws ShapeMismatch or ParseError
/// when a name is missing or a shape differs.
void load_module_tensors(torch::nn::Module& module, const std::map<std::string, torch::Tensor>& src,
                         const std::string& prefix);

}  // namespace egonav
