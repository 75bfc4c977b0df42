#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "capgen/model.hpp"
#include "capgen/text_prep.hpp"

namespace capgen {

struct LoadedCheckpoint {
    MergeModel<float> model;
    Vocabulary vocab;
    std::uint32_t epoch = 0;
    float final_loss = 0.0f;
};

// Binary layout: `MCPT` magic, u32-LE version, config block (six u32-LE:
// feature_dim, max_len, embed_dim, hidden_dim, vocab_size, reserved; then f32
// dropout), the embedded vocabulary (u32 count, per word u16 length + UTF-8
// bytes, index = position + 1), the parameter table (u32 count; per tensor
// u16 name length + name, u8 ndim, ndim u32 dims, f32-LE data), u32 epoch,
// f32 final loss.
std::string save_checkpoint(const MergeModel<float>& model, const Vocabulary& vocab, std::uint32_t epoch,
                            float final_loss);

LoadedCheckpoint load_checkpoint(std::string_view bytes);

}  // namespace capgen
