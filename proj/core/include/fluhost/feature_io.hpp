#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fluhost/matrix.hpp"
#include "fluhost/pssm.hpp"

namespace fluhost::pssm {

struct FeatureTable {
    Scheme scheme = Scheme::EG;
    std::vector<std::string> ids;
    std::vector<std::string> labels;
    Matrix values;  // one row per id

    friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

// Header `id,label,scheme,v0,...,vN`, one row per record.
std::string to_csv(const FeatureTable& t);
FeatureTable features_from_csv(std::string_view text);

// Binary columnar layout, all integers and doubles little-endian:
//   [0,8)   magic "FLUHFEAT"
//   [8,12)  u32 format version (1)
//   [12,16) u32 scheme (0 EG, 1 GDPC, 2 ER)
//   u64 rows, u64 cols
//   rows x (u32 length, bytes) ids, then the same for labels
//   cols x rows f64 values, column by column
std::string to_binary(const FeatureTable& t);
FeatureTable features_from_binary(std::string_view bytes);

}  // namespace fluhost::pssm
