#include "geosid/data_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geosid/error.hpp"
#include "geosid/format.hpp"
#include "geosid/rng.hpp"

namespace geosid {

using nlohmann::json;

namespace {

class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s);
    }
    void checksum() { u64(fnv1a64(bytes_)); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes, std::size_t pos = 0) : bytes_(bytes), pos_(pos) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw Error(ErrorKind::io, "TruncatedFile", "unexpected end of data");
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_;
};

[[noreturn]] void corrupt(const std::string& code, const std::string& msg) {
    throw Error(ErrorKind::io, code, msg);
}

// Splits off and checks the trailing checksum; returns the payload length.
std::size_t verify_checksum(std::span<const std::uint8_t> bytes, const char* what) {
    if (bytes.size() < 8) corrupt("TruncatedFile", std::string(what) + " is too short");
    const std::size_t body = bytes.size() - 8;
    ByteReader tail(bytes, body);
    if (tail.u64() != fnv1a64(bytes.first(body))) {
        corrupt("ChecksumMismatch", std::string(what) + " checksum does not match its contents");
    }
    return body;
}

std::string join_sizes(const std::vector<std::uint32_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<std::uint32_t> parse_sizes(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    return out;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("InvalidNumber", "cannot parse '" + s + "'");
    return v;
}

std::string config_header(const TrainConfig& c, std::uint32_t version) {
    std::string h = "geosid-codebook\n";
    h += "format_version=" + std::to_string(version) + "\n";
    h += "variant=" + to_string(c.variant) + "\n";
    h += "layer_sizes=" + join_sizes(c.layer_sizes) + "\n";
    h += "max_iters=" + std::to_string(c.max_iters) + "\n";
    h += "tol=" + shortest(c.tol) + "\n";
    h += "seed=" + std::to_string(c.seed) + "\n";
    h += "geo_attributes=" + (c.geo_attributes.empty() ? std::string("none") : c.geo_attributes.to_string()) + "\n";
    h += "alpha=" + shortest(c.alpha) + "\n";
    h += "beta=" + shortest(c.beta) + "\n";
    h += "rope_layer=" + to_string(c.rope_layer) + "\n";
    h += "coord_frame=" + to_string(c.coord_frame) + "\n";
    h += "d_scale_km=" + shortest(c.d_scale_km) + "\n";
    h += "end_header\n";
    return h;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr double km_per_degree() { return 6371.0 * std::numbers::pi / 180.0; }

GeoPoint offset_km(double lat, double lon, double north_km, double east_km) {
    const double new_lat = lat + north_km / km_per_degree();
    const double new_lon = lon + east_km / (km_per_degree() * std::cos(lat * std::numbers::pi / 180.0));
    return {new_lat, new_lon};
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) { return slurp(path); }

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail_io("write failed for '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

// ---- corpus ----------------------------------------------------------------

std::vector<GeoPoint> Corpus::locations() const {
    std::vector<GeoPoint> out;
    out.reserve(pois.size());
    for (const auto& p : pois) out.push_back(p.location);
    return out;
}

Matrix Corpus::ordered_embeddings() const {
    Matrix out(pois.size(), dim());
    for (std::size_t i = 0; i < pois.size(); ++i) {
        const auto src = embeddings.row(pois[i].embedding_ref);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

void Corpus::validate() const {
    if (embeddings.rows() != pois.size()) {
        fail("CountMismatch", std::to_string(pois.size()) + " POI records but " + std::to_string(embeddings.rows()) +
                                  " embeddings");
    }
    if (dim() % 2 != 0) fail("OddDimension", "embedding dimension must be even, got " + std::to_string(dim()));
    std::set<std::string> ids;
    for (std::size_t i = 0; i < pois.size(); ++i) {
        const auto& p = pois[i];
        const std::string where = "record " + std::to_string(i) + " (id '" + p.id + "')";
        if (p.id.empty()) fail("InvalidRecord", where + ": empty id");
        if (!ids.insert(p.id).second) fail("DuplicatePoi", where + ": duplicate id");
        if (p.embedding_ref >= embeddings.rows()) fail("InvalidRecord", where + ": embedding_ref out of range");
        for (double v : embeddings.row(p.embedding_ref)) {
            if (!std::isfinite(v)) fail("NonFiniteEmbedding", where + ": embedding has a non-finite value");
        }
    }
}

std::vector<std::uint8_t> encode_embeddings(const Matrix& m) {
    ByteWriter w;
    w.u32(kEmbeddingMagic);
    w.u32(kEmbeddingVersion);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) w.f32(v);
    w.checksum();
    return w.take();
}

Matrix decode_embeddings(std::span<const std::uint8_t> bytes) {
    const std::size_t body = verify_checksum(bytes, "embedding file");
    ByteReader r(bytes.first(body));
    if (r.u32() != kEmbeddingMagic) corrupt("BadMagic", "not an embedding file");
    const auto version = r.u32();
    if (version != kEmbeddingVersion) corrupt("UnsupportedVersion", "embedding format version " + std::to_string(version));
    const std::size_t n = r.u32();
    const std::size_t m = r.u32();
    if (r.remaining() != n * m * 4) corrupt("TruncatedFile", "embedding payload size does not match N*M");
    Matrix out(n, m);
    for (auto& v : out.data()) v = r.f32();
    return out;
}

void write_embeddings(const Matrix& m, const std::filesystem::path& path) { write_file(path, encode_embeddings(m)); }

Matrix read_embeddings(const std::filesystem::path& path) { return decode_embeddings(slurp(path)); }

std::string encode_pois(std::span<const PoiRecord> pois) {
    std::string out;
    for (const auto& p : pois) {
        json j;
        j["id"] = p.id;
        j["lat"] = p.location.lat();
        j["lon"] = p.location.lon();
        if (p.category) j["category"] = *p.category;
        j["embedding_ref"] = p.embedding_ref;
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<PoiRecord> decode_pois(const std::string& text) {
    std::vector<PoiRecord> out;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail("InvalidRecord", where + ": " + e.what());
        }
        try {
            PoiRecord p;
            p.id = j.at("id").get<std::string>();
            const double lat = j.at("lat").get<double>();
            const double lon = j.at("lon").get<double>();
            try {
                p.location = GeoPoint(lat, lon);
            } catch (const Error& e) {
                fail("InvalidRecord", where + " (id '" + p.id + "'): " + e.what());
            }
            p.embedding_ref = j.contains("embedding_ref") ? j["embedding_ref"].get<std::size_t>() : out.size();
            if (j.contains("category") && !j["category"].is_null()) p.category = j["category"].get<std::string>();
            out.push_back(std::move(p));
        } catch (const json::exception& e) {
            fail("InvalidRecord", where + ": " + e.what());
        }
    }
    return out;
}

Corpus load_corpus(const std::filesystem::path& poi_path, const std::filesystem::path& embedding_path) {
    const auto text = slurp(poi_path);
    Corpus c;
    c.pois = decode_pois(std::string(text.begin(), text.end()));
    c.embeddings = read_embeddings(embedding_path);
    c.validate();
    return c;
}

Corpus load_corpus_dir(const std::filesystem::path& dir) {
    return load_corpus(dir / "pois.jsonl", dir / "embeddings.bin");
}

void save_corpus_dir(const Corpus& corpus, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail_io("cannot create '" + dir.string() + "': " + ec.message());
    write_text(dir / "pois.jsonl", encode_pois(corpus.pois));
    write_embeddings(corpus.embeddings, dir / "embeddings.bin");
}

// ---- codebook artifact -------------------------------------------------------

const GeoAnchor& GeoStage::lookup(const std::vector<Code>& key) const {
    const auto it = anchors.find(key);
    return it == anchors.end() ? fallback : it->second;
}

LayerCapacities CodebookArtifact::capacities() const {
    LayerCapacities caps;
    if (layers.size() > 0) caps.k1 = static_cast<std::uint32_t>(layers[0].size());
    if (layers.size() > 1) caps.k2 = static_cast<std::uint32_t>(layers[1].size());
    if (layers.size() > 2) caps.k3 = static_cast<std::uint32_t>(layers[2].size());
    return caps;
}

// Binary layout after the header, all little-endian:
//   u32 layer_count; per layer: u32 metric, u32 K, u32 dim, K*dim f32
//   u32 stage_count; per stage: u32 before_layer, u32 key_depth,
//       f64 fallback lat, lon, d_scale; u64 anchor_count;
//       per anchor: key_depth * u32 code, f64 lat, lon, d_scale
//   u64 entry_count; per entry: u32 id length, id bytes, u32 j1, j2, j3, f64 lat, lon
//   u64 FNV-1a checksum of everything before it
std::vector<std::uint8_t> encode_codebook(const CodebookArtifact& a) {
    ByteWriter w;
    w.raw(config_header(a.config, a.format_version));
    w.u32(static_cast<std::uint32_t>(a.layers.size()));
    for (const auto& layer : a.layers) {
        w.u32(static_cast<std::uint32_t>(layer.metric));
        w.u32(static_cast<std::uint32_t>(layer.size()));
        w.u32(static_cast<std::uint32_t>(layer.dim()));
        for (double v : layer.centroids.data()) w.f32(v);
    }
    w.u32(static_cast<std::uint32_t>(a.geo_stages.size()));
    for (const auto& st : a.geo_stages) {
        w.u32(st.before_layer);
        w.u32(st.key_depth);
        w.f64(st.fallback.center.lat());
        w.f64(st.fallback.center.lon());
        w.f64(st.fallback.d_scale_km);
        w.u64(st.anchors.size());
        for (const auto& [key, anchor] : st.anchors) {
            if (key.size() != st.key_depth) fail("InvalidArtifact", "geo anchor key length differs from key_depth");
            for (auto code : key) w.u32(code);
            w.f64(anchor.center.lat());
            w.f64(anchor.center.lon());
            w.f64(anchor.d_scale_km);
        }
    }
    w.u64(a.index.size());
    for (const auto& e : a.index.entries()) {
        w.str(e.poi_id);
        w.u32(e.sid.j1);
        w.u32(e.sid.j2);
        w.u32(e.sid.j3);
        w.f64(e.location.lat());
        w.f64(e.location.lon());
    }
    w.checksum();
    return w.take();
}

CodebookArtifact decode_codebook(std::span<const std::uint8_t> bytes) {
    const std::size_t body = verify_checksum(bytes, "codebook");
    const auto payload = bytes.first(body);

    // Header lines up to and including "end_header\n".
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    bool first = true;
    bool done = false;
    while (!done) {
        std::size_t nl = pos;
        while (nl < payload.size() && payload[nl] != '\n') ++nl;
        if (nl >= payload.size()) corrupt("TruncatedFile", "codebook header is not terminated");
        const std::string line(reinterpret_cast<const char*>(payload.data() + pos), nl - pos);
        pos = nl + 1;
        if (first) {
            if (line != "geosid-codebook") corrupt("BadMagic", "not a codebook artifact");
            first = false;
        } else if (line == "end_header") {
            done = true;
        } else {
            const auto eq = line.find('=');
            if (eq == std::string::npos) corrupt("InvalidHeader", "malformed header line '" + line + "'");
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    auto get = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) corrupt("InvalidHeader", "missing header key '" + key + "'");
        return it->second;
    };

    CodebookArtifact a;
    a.format_version = static_cast<std::uint32_t>(std::stoul(get("format_version")));
    if (a.format_version != kCodebookVersion) {
        corrupt("UnsupportedVersion", "codebook format version " + std::to_string(a.format_version));
    }
    auto& c = a.config;
    try {
        c.variant = parse_variant(get("variant"));
        c.layer_sizes = parse_sizes(get("layer_sizes"));
        c.max_iters = static_cast<std::uint32_t>(std::stoul(get("max_iters")));
        c.tol = parse_double(get("tol"));
        c.seed = std::stoull(get("seed"));
        const auto& attrs = get("geo_attributes");
        c.geo_attributes = attrs == "none" ? AttributeSet() : AttributeSet::parse(attrs);
        c.alpha = parse_double(get("alpha"));
        c.beta = parse_double(get("beta"));
        c.rope_layer = parse_rope_layer(get("rope_layer"));
        c.coord_frame = parse_coord_frame(get("coord_frame"));
        c.d_scale_km = parse_double(get("d_scale_km"));
    } catch (const Error& e) {
        corrupt("InvalidHeader", e.what());
    } catch (const std::logic_error& e) {
        corrupt("InvalidHeader", e.what());
    }

    ByteReader r(payload, pos);
    const auto layer_count = r.u32();
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        CodebookLayer layer;
        const auto metric = r.u32();
        if (metric > 1) corrupt("InvalidArtifact", "unknown metric tag");
        layer.metric = static_cast<Metric>(metric);
        const std::size_t k = r.u32();
        const std::size_t dim = r.u32();
        if (r.remaining() < k * dim * 4) corrupt("TruncatedFile", "centroid block is truncated");
        layer.centroids = Matrix(k, dim);
        for (auto& v : layer.centroids.data()) v = r.f32();
        a.layers.push_back(std::move(layer));
    }
    const auto stage_count = r.u32();
    for (std::uint32_t s = 0; s < stage_count; ++s) {
        GeoStage st;
        st.before_layer = r.u32();
        st.key_depth = r.u32();
        const double flat = r.f64();
        const double flon = r.f64();
        st.fallback = {GeoPoint(flat, flon), r.f64()};
        const auto n = r.u64();
        for (std::uint64_t i = 0; i < n; ++i) {
            std::vector<Code> key(st.key_depth);
            for (auto& code : key) code = r.u32();
            const double lat = r.f64();
            const double lon = r.f64();
            st.anchors.emplace(std::move(key), GeoAnchor{GeoPoint(lat, lon), r.f64()});
        }
        a.geo_stages.push_back(std::move(st));
    }
    const auto entries = r.u64();
    std::vector<SidEntry> list;
    list.reserve(entries);
    for (std::uint64_t i = 0; i < entries; ++i) {
        SidEntry e;
        e.poi_id = r.str();
        e.sid.j1 = r.u32();
        e.sid.j2 = r.u32();
        e.sid.j3 = r.u32();
        const double lat = r.f64();
        const double lon = r.f64();
        e.location = GeoPoint(lat, lon);
        list.push_back(std::move(e));
    }
    if (r.remaining() != 0) corrupt("InvalidArtifact", "trailing bytes after the SID index");
    a.index = SidIndex(std::move(list));
    return a;
}

void save_codebook(const CodebookArtifact& a, const std::filesystem::path& path) { write_file(path, encode_codebook(a)); }

CodebookArtifact load_codebook(const std::filesystem::path& path) { return decode_codebook(slurp(path)); }

// ---- synthetic corpus ----------------------------------------------------------

void SynthConfig::validate() const {
    if (n_semantic_clusters == 0 || pois_per_cluster == 0 || geo_subclusters_per_semantic == 0) {
        fail("InvalidConfig", "synthetic counts must be at least 1");
    }
    if (embedding_dim == 0 || embedding_dim % 2 != 0) fail("OddDimension", "embedding_dim must be even and positive");
    if (!(subcluster_separation_km >= 0.0) || !(subcluster_spread_km >= 0.0) || !(noise_std >= 0.0) ||
        !(region_radius_km >= 0.0)) {
        fail("InvalidConfig", "synthetic distances and noise must be non-negative");
    }
    GeoPoint(origin_lat, origin_lon);
}

std::vector<std::uint32_t> synthetic_blob_labels(const SynthConfig& cfg) {
    std::vector<std::uint32_t> out;
    out.reserve(static_cast<std::size_t>(cfg.n_semantic_clusters) * cfg.pois_per_cluster);
    for (std::uint32_t c = 0; c < cfg.n_semantic_clusters; ++c) {
        for (std::uint32_t p = 0; p < cfg.pois_per_cluster; ++p) {
            out.push_back(c * cfg.geo_subclusters_per_semantic + p % cfg.geo_subclusters_per_semantic);
        }
    }
    return out;
}

Corpus generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const std::size_t m = cfg.embedding_dim;
    const std::uint32_t g_count = cfg.geo_subclusters_per_semantic;
    Corpus corpus;
    corpus.embeddings = Matrix(static_cast<std::size_t>(cfg.n_semantic_clusters) * cfg.pois_per_cluster, m);
    std::size_t next = 0;
    std::vector<double> dir(m);
    std::vector<GeoPoint> centers(g_count);
    for (std::uint32_t c = 0; c < cfg.n_semantic_clusters; ++c) {
        double norm = 0.0;
        do {
            for (auto& v : dir) v = rng.normal();
            norm = std::sqrt(dot(dir, dir));
        } while (norm == 0.0);
        for (auto& v : dir) v /= norm;

        const double anchor_r = cfg.region_radius_km * std::sqrt(rng.uniform01());
        const double anchor_b = 2.0 * std::numbers::pi * rng.uniform01();
        const GeoPoint anchor = offset_km(cfg.origin_lat, cfg.origin_lon, anchor_r * std::cos(anchor_b),
                                          anchor_r * std::sin(anchor_b));
        const double bearing = 2.0 * std::numbers::pi * rng.uniform01();
        for (std::uint32_t g = 0; g < g_count; ++g) {
            const double along = (static_cast<double>(g) - (g_count - 1) / 2.0) * cfg.subcluster_separation_km;
            centers[g] = offset_km(anchor.lat(), anchor.lon(), along * std::cos(bearing), along * std::sin(bearing));
        }

        for (std::uint32_t p = 0; p < cfg.pois_per_cluster; ++p, ++next) {
            auto row = corpus.embeddings.row(next);
            for (std::size_t t = 0; t < m; ++t) {
                row[t] = static_cast<double>(static_cast<float>(dir[t] + cfg.noise_std * rng.normal()));
            }
            const GeoPoint& center = centers[p % g_count];
            const double north = cfg.subcluster_spread_km * rng.normal();
            const double east = cfg.subcluster_spread_km * rng.normal();
            PoiRecord rec;
            char id[32];
            std::snprintf(id, sizeof id, "poi-%07zu", next);
            rec.id = id;
            rec.location = offset_km(center.lat(), center.lon(), north, east);
            rec.embedding_ref = next;
            rec.category = "cat-" + std::to_string(c);
            corpus.pois.push_back(std::move(rec));
        }
    }
    return corpus;
}

// ---- GeoJSON ------------------------------------------------------------------

std::string to_geojson(std::span<const SidEntry> entries) {
    json features = json::array();
    for (const auto& e : entries) {
        json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Point"}, {"coordinates", {e.location.lon(), e.location.lat()}}};
        f["properties"] = {{"id", e.poi_id},
                           {"sid", e.sid.triple().to_string()},
                           {"j1", e.sid.j1},
                           {"j2", e.sid.j2},
                           {"j3", e.sid.j3}};
        features.push_back(std::move(f));
    }
    json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = std::move(features);
    return fc.dump() + "\n";
}

void export_geojson(std::span<const SidEntry> entries, const std::filesystem::path& path) {
    write_text(path, to_geojson(entries));
}

}  // namespace geosid
