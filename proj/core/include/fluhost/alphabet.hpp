#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace fluhost {

// The 20 canonical amino acids in PSI-BLAST column order.
inline constexpr std::string_view kAminoAcids = "ARNDCQEGHILKMFPSTWYV";
inline constexpr std::size_t kNumAminoAcids = 20;

// Column of `aa` in kAminoAcids, or -1 for anything else (including lowercase).
constexpr int amino_acid_index(char aa) noexcept {
    for (std::size_t i = 0; i < kAminoAcids.size(); ++i)
        if (kAminoAcids[i] == aa) return static_cast<int>(i);
    return -1;
}

constexpr bool is_amino_acid(char aa) noexcept { return amino_acid_index(aa) >= 0; }

}  // namespace fluhost
