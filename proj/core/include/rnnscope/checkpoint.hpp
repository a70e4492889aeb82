#pragma once

#include "rnnscope/training.hpp"

#include <optional>
#include <string>

namespace rnnscope {

/// Binary model checkpoint. Little-endian layout: magic "RNSC", u32 format
/// version, u32 architecture tag, u32 hidden size, u32 embedding dim,
/// u32 vocab size, u32 tensor count, then named tensors (u32 name length,
/// name bytes, u32 rows, u32 cols, rows*cols IEEE-754 float32, row-major).
/// The vocabulary is a UTF-8 token-per-line companion at <path>.vocab.
/// save -> load -> save is byte-identical; loading rejects version or
/// architecture mismatches.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ClassifierModel& model,
                     const Vocabulary& vocab);

struct LoadedCheckpoint {
    ClassifierModel model;
    Vocabulary vocabulary;
};

/// `expected_architecture`, when set, must match the stored tag.
LoadedCheckpoint load_checkpoint(const std::string& path,
                                 std::optional<Architecture> expected_architecture = {});

}  // namespace rnnscope
