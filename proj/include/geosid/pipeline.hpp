#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geosid/data_io.hpp"
#include "geosid/metrics.hpp"
#include "geosid/quantizer.hpp"
#include "geosid/sid.hpp"

namespace geosid {

struct RunResult {
    CodebookArtifact artifact;
    std::vector<Sid> sids;  // in corpus order
    QuantReport report;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;

    const TrainConfig& config() const { return artifact.config; }
};

/// Trains three layers over the corpus. Stage order:
///   layer 1 -> [geo, keyed by j1] -> layer 2 -> [geo, keyed by (j1,j2)] -> layer 3
/// where the bracketed stages run according to rope_layer for geo variants.
/// With CoordFrame::global every stage uses one corpus-wide anchor instead.
RunResult run(const Corpus& corpus, const TrainConfig& cfg, ExecPolicy policy = ExecPolicy::parallel);

/// Replays a trained artifact over a corpus (no training). For the training
/// corpus this reproduces the training SIDs exactly.
std::vector<Sid> assign_corpus(const CodebookArtifact& artifact, const Corpus& corpus,
                               ExecPolicy policy = ExecPolicy::parallel);

/// Anchors of one geo stage, computed from the training assignments.
GeoStage fit_geo_stage(std::span<const GeoPoint> locations, const std::vector<std::vector<Code>>& keys,
                       std::uint32_t before_layer, const TrainConfig& cfg, std::vector<std::string>* warnings);

/// Layer input for a geo stage: build_variant_vector of every residual row
/// against its group's anchor.
Matrix enhance(const Matrix& residual, std::span<const GeoPoint> locations,
               const std::vector<std::vector<Code>>& keys, const GeoStage& stage, const TrainConfig& cfg);

struct ReportRow {
    std::string label;
    TrainConfig config;
    QuantReport report;
};

std::vector<ReportRow> compare(const Corpus& corpus, const std::vector<TrainConfig>& cfgs,
                               ExecPolicy policy = ExecPolicy::parallel);

using SweepGrid = std::vector<std::pair<double, double>>;

const SweepGrid& default_sweep_grid();

/// One pro_geo run per (alpha, beta) pair on top of `base`.
std::vector<ReportRow> sweep_alpha_beta(const Corpus& corpus, const SweepGrid& grid, const TrainConfig& base,
                                        ExecPolicy policy = ExecPolicy::parallel);

/// One pro_geo run per attribute-ablation row on top of `base`.
std::vector<ReportRow> sweep_attributes(const Corpus& corpus, const TrainConfig& base,
                                        ExecPolicy policy = ExecPolicy::parallel);

/// Aligned text table; the first column is the row label. The header line
/// notes the CUR denominator so the numbers are self-describing.
std::string format_table(const std::vector<ReportRow>& rows);
/// One JSON object per row.
std::string format_records(const std::vector<ReportRow>& rows);

}  // namespace geosid
