#include <charconv>
#include <map>

#include <fmt/format.h>

#include "binary_io.hpp"
#include "ccsp/model.hpp"

namespace ccsp {

namespace {

constexpr std::string_view kMagic = "CCSP";

[[noreturn]] void format_error(ModelFormatErrorKind kind, const std::string& what) {
  throw ModelFormatError(kind, what);
}

[[noreturn]] void truncated(std::string_view what) {
  format_error(ModelFormatErrorKind::shape_mismatch, fmt::format("model file truncated while reading {}", what));
}

ad::Tensor matrix_blob(const Matrix& m) {
  ad::Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  return t;
}

Matrix blob_matrix(const ad::Tensor& t) {
  Matrix m(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = t[static_cast<std::size_t>(i * m.cols() + j)];
  return m;
}

// Ordered list of (name, tensor) pairs in the declared blob order.
std::vector<std::pair<std::string, ad::Tensor>> collect_blobs(Model& model) {
  std::vector<std::pair<std::string, ad::Tensor>> blobs;
  const auto add = [&blobs](std::string name, const ad::Tensor& t) { blobs.emplace_back(std::move(name), t); };
  if (model.wavelet_params().defined()) add("wavelet", model.wavelet_params().value());
  if (model.temporal_kernels().defined()) {
    add("temporal.w", model.temporal_kernels().value());
    add("temporal.b", model.temporal_bias().value());
  }
  const auto add_norm = [&add](const std::string& prefix, const NormLayer& n) {
    add(prefix + ".gamma", n.gamma.value());
    add(prefix + ".beta", n.beta.value());
    add(prefix + ".running_mean", n.stats.mean);
    add(prefix + ".running_var", n.stats.var);
  };
  for (std::size_t i = 0; i < model.spectral_norms().size(); ++i)
    add_norm(fmt::format("spectral_bn{}", i), model.spectral_norms()[i]);
  for (std::size_t i = 0; i < model.dense_layers().size(); ++i) {
    add(fmt::format("dense{}.w", i), model.dense_layers()[i].w.value());
    add(fmt::format("dense{}.b", i), model.dense_layers()[i].b.value());
  }
  for (std::size_t i = 0; i < model.dense_norms().size(); ++i)
    add_norm(fmt::format("dense_bn{}", i), model.dense_norms()[i]);
  for (const auto& [group, opt] : {std::pair<std::string, ad::Adam*>{"wavelet", &model.wavelet_optimizer()},
                                   std::pair<std::string, ad::Adam*>{"main", &model.main_optimizer()}}) {
    for (const auto& slot : opt->slots()) {
      add(fmt::format("adam.{}.{}.m", group, slot.name), slot.m);
      add(fmt::format("adam.{}.{}.v", group, slot.name), slot.v);
    }
  }
  const auto& hist = model.history();
  ad::Tensor h({hist.size(), 5});
  for (std::size_t i = 0; i < hist.size(); ++i) {
    h[i * 5] = hist[i].epoch;
    h[i * 5 + 1] = hist[i].batch;
    h[i * 5 + 2] = hist[i].csp_loss;
    h[i * 5 + 3] = hist[i].fisher;
    h[i * 5 + 4] = hist[i].combined;
  }
  add("history", h);
  if (model.finalized()) {
    const auto& fz = model.frozen();
    for (std::size_t k = 0; k < fz.filters.size(); ++k) add(fmt::format("csp{}.filter", k), matrix_blob(fz.filters[k]));
    if (model.has_lda()) {
      ad::Tensor w({static_cast<std::size_t>(fz.lda.w.size())});
      for (Eigen::Index i = 0; i < fz.lda.w.size(); ++i) w[static_cast<std::size_t>(i)] = fz.lda.w(i);
      add("lda.w", w);
      add("lda.means", ad::Tensor({2}, std::vector<double>{fz.lda.mu0, fz.lda.mu1}));
    }
  }
  return blobs;
}

std::uint64_t parse_u64(const std::string& text, std::string_view what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    format_error(ModelFormatErrorKind::shape_mismatch, fmt::format("model header: bad {} '{}'", what, text));
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(Model& model) {
  KvDocument doc;
  model.config().write(doc.section("model"));
  auto& state = doc.section("state");
  state.entries.push_back({"finalized", model.finalized() ? "true" : "false", 0});
  state.entries.push_back({"adam_wavelet_steps", fmt::format("{}", model.wavelet_optimizer().step_count()), 0});
  state.entries.push_back({"adam_main_steps", fmt::format("{}", model.main_optimizer().step_count()), 0});
  const std::string header = doc.to_string();

  const auto blobs = collect_blobs(model);
  detail::ByteWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(header.size()));
  w.put_bytes(header);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(blobs.size()));
  for (const auto& [name, t] : blobs) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.put_bytes(name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.put<std::uint64_t>(d);
    w.put_array<double>(t.data());
  }
  return std::move(w.bytes());
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  std::string magic;
  if (!r.get_string(kMagic.size(), magic) || magic != kMagic) {
    format_error(ModelFormatErrorKind::bad_magic, "not a model file (bad magic)");
  }
  std::uint32_t version = 0;
  if (!r.get(version)) truncated("version");
  if (version != kModelFormatVersion) {
    format_error(ModelFormatErrorKind::bad_version,
                 fmt::format("unsupported model format version {} (expected {})", version, kModelFormatVersion));
  }
  std::uint32_t header_len = 0;
  std::string header;
  if (!r.get(header_len) || !r.get_string(header_len, header)) truncated("header");

  KvDocument doc;
  ModelConfig config;
  try {
    doc = parse_kv(header, "model header");
    const auto* ms = doc.find_section("model");
    if (ms == nullptr) throw_data("model header: missing [model] section");
    config = ModelConfig::read(*ms, "model header");
  } catch (const ModelFormatError&) {
    throw;
  } catch (const Error& e) {
    format_error(ModelFormatErrorKind::shape_mismatch, e.what());
  }
  const auto* state = doc.find_section("state");
  if (state == nullptr) format_error(ModelFormatErrorKind::shape_mismatch, "model header: missing [state] section");
  const auto state_get = [state](std::string_view key) {
    auto v = state->get(key);
    if (!v) format_error(ModelFormatErrorKind::shape_mismatch, fmt::format("model header: missing state.{}", key));
    return *v;
  };
  const bool finalized = state_get("finalized") == "true";

  std::uint32_t count = 0;
  if (!r.get(count)) truncated("blob count");
  std::map<std::string, ad::Tensor> blobs;
  for (std::uint32_t b = 0; b < count; ++b) {
    std::uint16_t name_len = 0;
    std::string name;
    std::uint32_t rank = 0;
    if (!r.get(name_len) || !r.get_string(name_len, name) || !r.get(rank)) truncated(fmt::format("blob {}", b));
    if (rank > 8) format_error(ModelFormatErrorKind::shape_mismatch, fmt::format("blob '{}': rank {} too large", name, rank));
    ad::Shape shape(rank);
    std::size_t size = 1;
    for (auto& d : shape) {
      std::uint64_t v = 0;
      if (!r.get(v)) truncated(fmt::format("blob '{}' dims", name));
      if (v > r.remaining()) truncated(fmt::format("blob '{}' data", name));
      d = static_cast<std::size_t>(v);
      size *= d;
    }
    if (size > r.remaining() / sizeof(double)) truncated(fmt::format("blob '{}' data", name));
    ad::Tensor t(shape);
    if (!r.get_array(size, t.raw())) truncated(fmt::format("blob '{}' data", name));
    blobs.emplace(std::move(name), std::move(t));
  }
  if (r.remaining() != 0) {
    format_error(ModelFormatErrorKind::shape_mismatch, fmt::format("{} trailing bytes after the last blob", r.remaining()));
  }

  Model model(config);
  std::size_t used = 0;
  const auto take = [&](const std::string& name, const ad::Shape& expected) -> ad::Tensor {
    auto it = blobs.find(name);
    if (it == blobs.end()) format_error(ModelFormatErrorKind::shape_mismatch, fmt::format("missing blob '{}'", name));
    if (!expected.empty() && it->second.shape() != expected) {
      format_error(ModelFormatErrorKind::shape_mismatch,
                   fmt::format("blob '{}' has shape {}, expected {}", name, ad::shape_string(it->second.shape()),
                               ad::shape_string(expected)));
    }
    ++used;
    return it->second;
  };
  const auto load_var = [&](const std::string& name, ad::Var& v) { v.mutable_value() = take(name, v.shape()); };

  if (model.wavelet_params().defined()) load_var("wavelet", model.wavelet_params());
  if (model.temporal_kernels().defined()) {
    load_var("temporal.w", model.temporal_kernels());
    load_var("temporal.b", model.temporal_bias());
  }
  const auto load_norm = [&](const std::string& prefix, NormLayer& n) {
    load_var(prefix + ".gamma", n.gamma);
    load_var(prefix + ".beta", n.beta);
    n.stats.mean = take(prefix + ".running_mean", n.stats.mean.shape());
    n.stats.var = take(prefix + ".running_var", n.stats.var.shape());
  };
  for (std::size_t i = 0; i < model.spectral_norms().size(); ++i)
    load_norm(fmt::format("spectral_bn{}", i), model.spectral_norms()[i]);
  for (std::size_t i = 0; i < model.dense_layers().size(); ++i) {
    load_var(fmt::format("dense{}.w", i), model.dense_layers()[i].w);
    load_var(fmt::format("dense{}.b", i), model.dense_layers()[i].b);
  }
  for (std::size_t i = 0; i < model.dense_norms().size(); ++i)
    load_norm(fmt::format("dense_bn{}", i), model.dense_norms()[i]);
  for (const auto& [group, opt] : {std::pair<std::string, ad::Adam*>{"wavelet", &model.wavelet_optimizer()},
                                   std::pair<std::string, ad::Adam*>{"main", &model.main_optimizer()}}) {
    for (auto& slot : opt->mutable_slots()) {
      slot.m = take(fmt::format("adam.{}.{}.m", group, slot.name), slot.m.shape());
      slot.v = take(fmt::format("adam.{}.{}.v", group, slot.name), slot.v.shape());
    }
  }
  model.wavelet_optimizer().restore(static_cast<long>(parse_u64(state_get("adam_wavelet_steps"), "step count")));
  model.main_optimizer().restore(static_cast<long>(parse_u64(state_get("adam_main_steps"), "step count")));

  const auto hist = take("history", {});
  if (hist.rank() != 2 || hist.dim(1) != 5) format_error(ModelFormatErrorKind::shape_mismatch, "history blob must be rows x 5");
  for (std::size_t i = 0; i < hist.dim(0); ++i) {
    model.mutable_history().push_back(HistoryEntry{static_cast<int>(hist[i * 5]), static_cast<int>(hist[i * 5 + 1]),
                                                   hist[i * 5 + 2], hist[i * 5 + 3], hist[i * 5 + 4]});
  }

  if (finalized) {
    FrozenArtifacts fz;
    const auto c = static_cast<std::size_t>(config.n_channels);
    for (int k = 0; k < config.n_maps(); ++k) {
      fz.filters.push_back(blob_matrix(take(fmt::format("csp{}.filter", k), {c, csp::kFeaturesPerBranch})));
    }
    if (model.has_lda()) {
      const auto d = static_cast<std::size_t>(config.classifier_dim());
      const auto w = take("lda.w", {d});
      const auto means = take("lda.means", {2});
      fz.lda.w = Eigen::Map<const Vector>(w.raw(), static_cast<Eigen::Index>(d));
      fz.lda.mu0 = means[0];
      fz.lda.mu1 = means[1];
      fz.lda.fitted = true;
    }
    model.set_frozen(std::move(fz));
  }
  if (used != blobs.size()) {
    format_error(ModelFormatErrorKind::shape_mismatch,
                 fmt::format("model file holds {} blobs, {} expected for its config", blobs.size(), used));
  }
  return model;
}

void save_model(Model& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  detail::write_file(path.string(), bytes);
}

Model load_model(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  try {
    return deserialize_model(bytes);
  } catch (const ModelFormatError& e) {
    throw ModelFormatError(e.format_kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace ccsp
