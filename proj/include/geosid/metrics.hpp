#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geosid/geo.hpp"
#include "geosid/sid.hpp"

namespace geosid {

/// Quantization quality of one assignment set. Groups are full (j1,j2,j3)
/// triples; j4 is ignored.
struct QuantReport {
    double cur = 0.0;  // distinct triples / (K1*K2*K3)
    double icr = 0.0;  // POIs alone in their triple / N
    double avg_dist_km = 0.0;
    double p90_dist_km = 0.0;
    double p95_dist_km = 0.0;
    std::uint64_t group_count = 0;
    std::uint64_t poi_count = 0;

    bool operator==(const QuantReport&) const = default;
};

struct Dispersion {
    double avg_km = 0.0;
    double p90_km = 0.0;
    double p95_km = 0.0;
    double max_km = 0.0;
};

double icr(std::span<const Sid> sids);
double cur(std::span<const Sid> sids, const LayerCapacities& caps);

/// Nearest-rank percentile: the ceil(percent/100 * N)-th smallest value.
double nearest_rank_percentile(std::vector<double> values, unsigned percent);

/// Distances of every POI to the geo-centroid of its triple group, pooled.
/// `locations[i]` belongs to `sids[i]`; a size mismatch is a missing location.
Dispersion geo_dispersion(std::span<const Sid> sids, std::span<const GeoPoint> locations,
                          const EarthModel& earth = {});

QuantReport quant_report(std::span<const Sid> sids, std::span<const GeoPoint> locations,
                         const LayerCapacities& caps, const EarthModel& earth = {});

/// Column names, matching the usual quantization table headers.
const std::vector<std::string>& quant_report_columns();
std::vector<std::string> quant_report_cells(const QuantReport& r);

struct RankingCase {
    std::vector<Sid> predicted;
    Sid truth;

    bool has_duplicates() const;
};

/// 1-based rank of the first occurrence of truth, 0 if absent. Compares triples.
std::size_t truth_rank(const RankingCase& c);
int hit_at_n(const RankingCase& c, std::size_t n);
/// 1/log2(1 + rank) when truth is within the first n, else 0.
double ndcg_at_n(const RankingCase& c, std::size_t n);

struct RankingSummary {
    double hit = 0.0;
    double ndcg = 0.0;
    std::size_t cases = 0;
};

RankingSummary evaluate_ranking(std::span<const RankingCase> cases, std::size_t n);

}  // namespace geosid
