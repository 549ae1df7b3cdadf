#ifndef WF_CHECKPOINT_HPP
#define WF_CHECKPOINT_HPP

#include <cstdint>
#include <string>

#include "wf/nn.hpp"

namespace wf {

/// Versioned text checkpoint: layer specs plus parameters as hexfloats, so a
/// reload evaluates bit-identically. The seed and PRNG algorithm that
/// produced the model ride along for provenance.
struct CheckpointMeta {
    std::string prng_algorithm = Prng::kAlgorithmId;
    std::uint64_t prng_seed = 0;
};

void save_checkpoint(const Mlp& model, const CheckpointMeta& meta, const std::string& path);

std::pair<Mlp, CheckpointMeta> load_checkpoint(const std::string& path);

} // namespace wf

#endif // WF_CHECKPOINT_HPP
