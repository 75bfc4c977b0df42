#pragma once

#include <span>
#include <string>
#include <vector>

#include "capgen/model.hpp"
#include "capgen/text_prep.hpp"

namespace capgen {

// Word-by-word argmax generation. Starts from [startseq], feeds the
// right-aligned padded prefix through the model, appends the most probable
// word (ties to the lowest index), and stops at endseq or after max_len-1
// words. The returned words exclude both sentinels and can never include the
// padding slot.
std::vector<std::string> greedy_decode(const MergeModel<float>& model, std::span<const float> feature,
                                       const Vocabulary& vocab, std::size_t max_len);

}  // namespace capgen
