#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fluhost {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

// Seed for a sub-task identified by (a, b), independent of scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

// 64-bit FNV-1a, stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::string hex64(std::uint64_t v);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Index of the first maximum.
std::size_t argmax(std::span<const double> v) noexcept;

// Worker count from FLUHOST_WORKERS, else hardware concurrency (min 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to `workers` threads. If any call throws,
// the exception from the lowest failing index is rethrown after all finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s) noexcept;

}  // namespace fluhost
