#include "kglp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace kglp {

namespace {

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    write_bytes(out, b, 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    write_bytes(out, b, 8);
}

void write_f64(std::ofstream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

void write_string(std::ofstream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    write_bytes(out, s.data(), s.size());
}

void read_bytes(std::ifstream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw ParseError("truncated checkpoint file");
}

std::uint32_t read_u32(std::ifstream& in) {
    unsigned char b[4];
    read_bytes(in, b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::ifstream& in) {
    unsigned char b[8];
    read_bytes(in, b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double read_f64(std::ifstream& in) { return std::bit_cast<double>(read_u64(in)); }

std::string read_string(std::ifstream& in) {
    auto n = read_u32(in);
    std::string s(n, '\0');
    read_bytes(in, s.data(), n);
    return s;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFault("cannot write checkpoint: " + path);
    return out;
}

std::ifstream open_in(const std::string& path, std::uint32_t expected_family) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    char magic[8];
    read_bytes(in, magic, 8);
    if (std::memcmp(magic, kCheckpointMagic, 8) != 0) {
        throw ParseError("not a checkpoint file: " + path);
    }
    auto version = read_u32(in);
    if (version != kCheckpointVersion) {
        throw ParseError("unsupported checkpoint version " + std::to_string(version));
    }
    auto family = read_u32(in);
    if (family != expected_family) {
        throw ParseError("checkpoint holds a different model family");
    }
    return in;
}

void write_header(std::ofstream& out, std::uint32_t family) {
    write_bytes(out, kCheckpointMagic, 8);
    write_u32(out, kCheckpointVersion);
    write_u32(out, family);
}

void write_config(std::ofstream& out, const KgemConfig& c) {
    write_u32(out, static_cast<std::uint32_t>(c.scoring));
    write_u32(out, static_cast<std::uint32_t>(c.dim));
    write_u32(out, static_cast<std::uint32_t>(c.loss));
    write_u32(out, c.margin.has_value() ? 1 : 0);
    write_f64(out, c.margin.value_or(0.0));
    write_u32(out, static_cast<std::uint32_t>(c.sampler));
    write_u32(out, static_cast<std::uint32_t>(c.npp));
    write_f64(out, c.lr);
    write_f64(out, c.reg_coef);
    write_u32(out, static_cast<std::uint32_t>(c.transe_norm));
    write_u32(out, static_cast<std::uint32_t>(c.batch_size));
    write_u32(out, static_cast<std::uint32_t>(c.epochs));
    write_u64(out, c.seed);
}

KgemConfig read_config(std::ifstream& in) {
    KgemConfig c;
    c.scoring = static_cast<ScoringKind>(read_u32(in));
    c.dim = static_cast<int>(read_u32(in));
    c.loss = static_cast<LossKind>(read_u32(in));
    bool has_margin = read_u32(in) != 0;
    double margin = read_f64(in);
    c.margin = has_margin ? std::optional<double>(margin) : std::nullopt;
    c.sampler = static_cast<SamplerKind>(read_u32(in));
    c.npp = static_cast<int>(read_u32(in));
    c.lr = read_f64(in);
    c.reg_coef = read_f64(in);
    c.transe_norm = static_cast<int>(read_u32(in));
    c.batch_size = static_cast<int>(read_u32(in));
    c.epochs = static_cast<int>(read_u32(in));
    c.seed = read_u64(in);
    return c;
}

} // namespace

void save_kgem_checkpoint(const std::string& path, const KgemModel& model,
                          std::uint64_t config_hash) {
    auto out = open_out(path);
    write_header(out, kFamilyKgem);
    write_config(out, model.config);
    write_u64(out, model.config.seed);
    write_u64(out, config_hash);
    write_u32(out, static_cast<std::uint32_t>(model.n_entities));
    write_u32(out, static_cast<std::uint32_t>(model.n_predicates));
    write_u32(out, static_cast<std::uint32_t>(model.row_dim));
    for (double v : model.entity_emb) write_f64(out, v);
    for (double v : model.pred_emb) write_f64(out, v);
    if (!out) throw RuntimeFault("failed writing checkpoint: " + path);
}

KgemModel load_kgem_checkpoint(const std::string& path, std::uint64_t* config_hash) {
    auto in = open_in(path, kFamilyKgem);
    KgemModel m;
    m.config = read_config(in);
    read_u64(in); // seed (also in config)
    auto hash = read_u64(in);
    if (config_hash) *config_hash = hash;
    m.n_entities = static_cast<std::int32_t>(read_u32(in));
    m.n_predicates = static_cast<std::int32_t>(read_u32(in));
    m.row_dim = static_cast<int>(read_u32(in));
    m.entity_emb.resize(static_cast<std::size_t>(m.n_entities) * m.row_dim);
    m.pred_emb.resize(static_cast<std::size_t>(m.n_predicates) * m.row_dim);
    for (auto& v : m.entity_emb) v = read_f64(in);
    for (auto& v : m.pred_emb) v = read_f64(in);
    return m;
}

void save_twigi_checkpoint(const std::string& path, const TwigIModel& model,
                           std::uint64_t config_hash) {
    auto out = open_out(path);
    write_header(out, kFamilyTwigI);
    write_u64(out, config_hash);

    const auto& spec = model.net.spec();
    write_u32(out, static_cast<std::uint32_t>(spec.size()));
    for (const auto& l : spec) {
        write_u32(out, static_cast<std::uint32_t>(l.in));
        write_u32(out, static_cast<std::uint32_t>(l.out));
        write_u32(out, static_cast<std::uint32_t>(l.act));
    }
    write_f64(out, model.net.dropout());

    const auto excluded = model.ablation.excluded_names();
    write_u32(out, static_cast<std::uint32_t>(excluded.size()));
    for (const auto& name : excluded) write_string(out, name);

    write_u32(out, static_cast<std::uint32_t>(model.normalizer.dim()));
    for (double v : model.normalizer.mean()) write_f64(out, v);
    for (double v : model.normalizer.stddev()) write_f64(out, v);

    write_u32(out, static_cast<std::uint32_t>(model.net.params().size()));
    for (double v : model.net.params()) write_f64(out, v);
    if (!out) throw RuntimeFault("failed writing checkpoint: " + path);
}

TwigIModel load_twigi_checkpoint(const std::string& path, std::uint64_t* config_hash) {
    auto in = open_in(path, kFamilyTwigI);
    auto hash = read_u64(in);
    if (config_hash) *config_hash = hash;

    auto n_layers = read_u32(in);
    std::vector<LayerSpec> spec;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        LayerSpec l;
        l.in = static_cast<int>(read_u32(in));
        l.out = static_cast<int>(read_u32(in));
        l.act = static_cast<Activation>(read_u32(in));
        spec.push_back(l);
    }
    double dropout = read_f64(in);

    auto n_excluded = read_u32(in);
    std::vector<std::string> excluded;
    for (std::uint32_t i = 0; i < n_excluded; ++i) excluded.push_back(read_string(in));

    auto norm_dim = read_u32(in);
    std::vector<double> mean(norm_dim), stddev(norm_dim);
    for (auto& v : mean) v = read_f64(in);
    for (auto& v : stddev) v = read_f64(in);

    auto n_params = read_u32(in);

    TwigIModel model;
    RngStream scratch(0);
    model.net = DenseNet(std::move(spec), dropout, scratch);
    if (model.net.params().size() != n_params) {
        throw ParseError("checkpoint parameter count does not match its layer spec");
    }
    for (auto& v : model.net.params()) v = read_f64(in);
    model.ablation = AblationMask(excluded);
    model.feature_names = model.ablation.surviving_names();
    model.normalizer = FeatureNormalizer(std::move(mean), std::move(stddev));
    if (static_cast<int>(model.feature_names.size()) != model.net.input_dim()) {
        throw ParseError("checkpoint feature list does not match network input width");
    }
    return model;
}

} // namespace kglp
