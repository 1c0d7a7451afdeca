#pragma once

// On-disk formats.
//
// Corpus directory:
//   pois.jsonl      one JSON object per line: {"id","lat","lon","category"?,"embedding_ref"?}
//                   embedding_ref defaults to the line number.
//   embeddings.bin  16-byte header, all little-endian u32: magic "GSEM",
//                   version 1, N, M; then N*M IEEE-754 f32 row-major; then a
//                   u64 FNV-1a checksum of every preceding byte.
//
// Codebook artifact: ASCII header of key=value lines between
// "geosid-codebook" and "end_header", then little-endian binary sections
// (centroids as f32, geo anchors and POI locations as f64), then a u64
// FNV-1a checksum of every preceding byte. See save_codebook for the layout.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geosid/geo.hpp"
#include "geosid/matrix.hpp"
#include "geosid/quantizer.hpp"
#include "geosid/sid.hpp"

namespace geosid {

struct PoiRecord {
    std::string id;
    GeoPoint location;
    std::size_t embedding_ref = 0;
    std::optional<std::string> category;

    bool operator==(const PoiRecord&) const = default;
};

struct Corpus {
    std::vector<PoiRecord> pois;
    Matrix embeddings;

    std::size_t size() const { return pois.size(); }
    std::size_t dim() const { return embeddings.cols(); }
    std::vector<GeoPoint> locations() const;
    /// Row i holds the embedding of pois[i].
    Matrix ordered_embeddings() const;
    /// Unique ids, refs in range, finite embeddings, even dimension.
    void validate() const;

    bool operator==(const Corpus&) const = default;
};

inline constexpr std::uint32_t kEmbeddingMagic = 0x4D455347;  // "GSEM" little-endian
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::uint32_t kCodebookVersion = 1;

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_embeddings(const Matrix& m);
Matrix decode_embeddings(std::span<const std::uint8_t> bytes);
void write_embeddings(const Matrix& m, const std::filesystem::path& path);
Matrix read_embeddings(const std::filesystem::path& path);

std::string encode_pois(std::span<const PoiRecord> pois);
std::vector<PoiRecord> decode_pois(const std::string& text);

Corpus load_corpus(const std::filesystem::path& poi_path, const std::filesystem::path& embedding_path);
/// Reads <dir>/pois.jsonl and <dir>/embeddings.bin.
Corpus load_corpus_dir(const std::filesystem::path& dir);
void save_corpus_dir(const Corpus& corpus, const std::filesystem::path& dir);

/// Frozen geo-centroid and distance scale of one cluster.
struct GeoAnchor {
    GeoPoint center;
    double d_scale_km = 1.0;

    bool operator==(const GeoAnchor&) const = default;
};

/// Geo quantities for one enhancement stage. Groups are keyed by the
/// leading `key_depth` codes of the SID (0 = one global frame).
struct GeoStage {
    std::uint32_t before_layer = 3;  // 1-based layer that consumes the enhanced vectors
    std::uint32_t key_depth = 2;
    std::map<std::vector<Code>, GeoAnchor> anchors;
    GeoAnchor fallback;  // used for groups unseen during training

    const GeoAnchor& lookup(const std::vector<Code>& key) const;
    bool operator==(const GeoStage&) const = default;
};

struct CodebookArtifact {
    std::uint32_t format_version = kCodebookVersion;
    TrainConfig config;
    std::vector<CodebookLayer> layers;
    std::vector<GeoStage> geo_stages;
    SidIndex index;

    LayerCapacities capacities() const;
    bool operator==(const CodebookArtifact&) const = default;
};

std::vector<std::uint8_t> encode_codebook(const CodebookArtifact& a);
CodebookArtifact decode_codebook(std::span<const std::uint8_t> bytes);
void save_codebook(const CodebookArtifact& a, const std::filesystem::path& path);
CodebookArtifact load_codebook(const std::filesystem::path& path);

/// Desk-scale corpus: semantic clusters around distinct random directions,
/// each split over geographic blobs placed `subcluster_separation_km` apart
/// along a random bearing.
struct SynthConfig {
    std::uint32_t n_semantic_clusters = 4;
    std::uint32_t pois_per_cluster = 100;
    std::uint32_t geo_subclusters_per_semantic = 2;
    double subcluster_separation_km = 40.0;
    double subcluster_spread_km = 2.0;
    std::uint32_t embedding_dim = 16;
    double noise_std = 0.1;
    std::uint64_t seed = 0;
    double origin_lat = 31.2304;
    double origin_lon = 121.4737;
    double region_radius_km = 30.0;  // cluster anchors fall within this disc

    void validate() const;
};

/// Embeddings are rounded to f32 so a saved corpus reloads bit-identically.
Corpus generate_synthetic(const SynthConfig& cfg);

/// Subcluster (blob) index of each POI in a synthetic corpus, in POI order.
std::vector<std::uint32_t> synthetic_blob_labels(const SynthConfig& cfg);

std::string to_geojson(std::span<const SidEntry> entries);
void export_geojson(std::span<const SidEntry> entries, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace geosid
