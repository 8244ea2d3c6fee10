// Table layout for the generated Unicode data (see scripts/gen_unicode_data.py).
#pragma once

#include <cstddef>
#include <cstdint>

namespace tokgraft::uni::data {

struct CpRange {
    std::uint32_t lo;
    std::uint32_t hi;
};

struct CombiningClass {
    std::uint32_t cp;
    std::uint8_t ccc;
};

// Raw canonical decomposition: cp -> (first, second); second == 0 for singletons.
struct Decomposition {
    std::uint32_t cp;
    std::uint32_t first;
    std::uint32_t second;
};

// Primary composite: (first, second) -> composed, exclusions already dropped.
struct CompositionPair {
    std::uint32_t first;
    std::uint32_t second;
    std::uint32_t composed;
};

extern const CpRange letter_ranges[];
extern const std::size_t letter_ranges_count;
extern const CpRange mark_ranges[];
extern const std::size_t mark_ranges_count;
extern const CpRange number_ranges[];
extern const std::size_t number_ranges_count;
extern const CpRange space_ranges[];
extern const std::size_t space_ranges_count;

extern const CombiningClass combining_classes[];
extern const std::size_t combining_classes_count;
extern const Decomposition decompositions[];
extern const std::size_t decompositions_count;
extern const CompositionPair composition_pairs[];
extern const std::size_t composition_pairs_count;

}  // namespace tokgraft::uni::data
