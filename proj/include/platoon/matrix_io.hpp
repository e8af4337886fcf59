#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <initializer_list>
#include <string>

#include "platoon/runtime.hpp"
#include "platoon/simulate.hpp"

namespace platoon {

struct SynthesisResult;  // synthesis.hpp

std::uint64_t fnv1a64(const void* data, std::size_t bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Order-sensitive content hash of a set of matrices, as a hex string.
std::string hash_matrices(std::initializer_list<const Eigen::MatrixXd*> mats);

/// JSON matrix container: named 2-d arrays plus named scalars/strings.
void save_data_batch(const std::string& path, const DataBatch& batch);
DataBatch load_data_batch(const std::string& path);

void save_synthesis_result(const std::string& path, const SynthesisResult& result,
                           std::uint64_t seed);
SynthesisResult load_synthesis_result(const std::string& path);

void save_controller_bundle(const std::string& path, const ControllerBundle& bundle);
ControllerBundle load_controller_bundle(const std::string& path);

}  // namespace platoon
