#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geosid/geo.hpp"
#include "geosid/kernels.hpp"

namespace geosid {

/// (j1, j2, j3) code triple, optionally extended by a layer-4 ordinal.
struct Sid {
    Code j1 = 0;
    Code j2 = 0;
    Code j3 = 0;
    std::optional<std::uint64_t> j4;

    /// Ordering and equality on the triple plus j4.
    auto operator<=>(const Sid&) const = default;

    Sid triple() const { return {j1, j2, j3, std::nullopt}; }
    std::string to_string() const;
};

struct LayerCapacities {
    std::uint32_t k1 = 0;
    std::uint32_t k2 = 0;
    std::uint32_t k3 = 0;

    std::uint64_t product() const {
        return static_cast<std::uint64_t>(k1) * static_cast<std::uint64_t>(k2) * static_cast<std::uint64_t>(k3);
    }
    bool operator==(const LayerCapacities&) const = default;
};

/// Throws CodeOutOfRange when an index is not below its layer capacity.
Sid assemble(Code j1, Code j2, Code j3, const LayerCapacities& caps);

/// One POI's entry in the index.
struct SidEntry {
    std::string poi_id;
    Sid sid;
    GeoPoint location;

    bool operator==(const SidEntry&) const = default;
};

/// Triple -> members (sorted by POI id) and POI id -> entry. Built once,
/// read-only afterwards.
class SidIndex {
public:
    SidIndex() = default;
    /// Throws DuplicatePoi if an id appears twice. j4 on input is dropped.
    explicit SidIndex(std::vector<SidEntry> entries);

    /// Entries in POI id order.
    const std::vector<SidEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t group_count() const { return groups_.size(); }

    /// Member positions (into entries()) of a triple; empty span if unknown.
    std::span<const std::size_t> group(const Sid& sid) const;
    const std::map<Sid, std::vector<std::size_t>>& groups() const { return groups_; }

    const SidEntry* find(const std::string& poi_id) const;

    bool operator==(const SidIndex& other) const { return entries_ == other.entries_; }

private:
    std::vector<SidEntry> entries_;
    std::map<Sid, std::vector<std::size_t>> groups_;
};

/// Within each triple group, members get j4 = 0..n-1 in POI id order.
std::map<std::string, Sid> hard_code_layer4(const SidIndex& index);

/// Members of `sid`'s group nearest to `user`, ordered by (distance, id),
/// at most k of them. Throws EmptySidGroup for an unknown triple.
std::vector<std::string> resolve_closest(const SidIndex& index, const Sid& sid, const GeoPoint& user, std::size_t k,
                                         const EarthModel& earth = {});

/// Uniform pick from the group, deterministic for a given seed.
std::string resolve_random(const SidIndex& index, const Sid& sid, std::uint64_t seed);

}  // namespace geosid
