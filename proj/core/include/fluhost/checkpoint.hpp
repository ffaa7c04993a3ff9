#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fluhost/nn/models.hpp"

namespace fluhost::checkpoint {

// Model container, little-endian:
//   [0,8)   magic "FLUHMODL"
//   [8,12)  u32 format version (1)
//   u64 header length, then a UTF-8 JSON header
//   u64 value count, then that many f64 values
struct Container {
    nlohmann::json header;
    std::vector<double> values;
};

std::string pack(const Container& c);
Container unpack(std::string_view bytes);

// Spec and parameter shapes go to JSON; parameter values are appended to
// `values` in parameter order.
nlohmann::json save_network(const nn::Network& net, std::vector<double>& values);

// Reads parameters starting at values[offset] and advances offset.
nn::Network load_network(const nlohmann::json& j, std::span<const double> values, std::size_t& offset);

}  // namespace fluhost::checkpoint
