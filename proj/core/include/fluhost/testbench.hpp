#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fluhost/pssm.hpp"
#include "fluhost/seqio.hpp"

namespace fluhost::testbench {

struct SynthClass {
    std::string name;  // becomes the record's host
    std::string motif;
    double proportion;
};

struct SynthSpec {
    std::vector<SynthClass> classes;
    std::size_t min_len = 30;
    std::size_t max_len = 50;
    std::size_t records = 300;
    std::uint64_t seed = 0;

    // Throws ConfigError for bad proportions or lengths, DataError when a
    // motif cannot fit in the shortest sequence.
    void validate() const;
};

// Built-in host classes with motifs drawn from disjoint residue groups.
std::size_t max_default_classes() noexcept;
SynthSpec default_spec(std::size_t records, std::size_t classes, std::uint64_t seed);

// Record counts per class by largest remainder; ties go to earlier classes.
std::vector<std::size_t> class_counts(const SynthSpec& spec);

// Uniform random residues with the class motif planted once at a random
// offset. Backgrounds are redrawn until the record holds its own motif
// exactly once and no other class's motif. Labels are at the fine level.
seqio::LabeledDataset generate(const SynthSpec& spec);

// One synthetic profile per record, in dataset order.
std::vector<pssm::RawPssm> synth_pssms(const seqio::LabeledDataset& ds, std::uint64_t seed);

// Number of (possibly overlapping) occurrences of `needle`.
std::size_t count_occurrences(std::string_view hay, std::string_view needle) noexcept;

}  // namespace fluhost::testbench
