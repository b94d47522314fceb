#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ccsp/error.hpp"
#include "ccsp/kv_text.hpp"

namespace ccsp::cli {

std::vector<int> parse_int_list(std::string_view text, std::string_view what) {
  std::vector<int> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(static_cast<int>(parse_int(trim(part), what)));
  return out;
}

namespace {

std::string where(std::string_view origin, const KvEntry& e) { return fmt::format("{}:{}", origin, e.line); }

void apply_model_key(ModelConfig& m, RunConfig& rc, const KvEntry& e, std::string_view origin) {
  const auto at = where(origin, e);
  const auto as_int = [&] { return static_cast<int>(parse_int(e.value, at + ": " + e.key)); };
  const auto as_double = [&] { return parse_double(e.value, at + ": " + e.key); };
  if (e.key == "n_wavelet_kernels") m.n_wavelet_kernels = as_int();
  else if (e.key == "wavelet_len") m.wavelet_len = as_int();
  else if (e.key == "n_temporal_kernels") m.n_temporal_kernels = as_int();
  else if (e.key == "temporal_len") m.temporal_len = as_int();
  else if (e.key == "dense_dims") m.dense_dims = parse_int_list(e.value, at + ": dense_dims");
  else if (e.key == "loss_ratio") m.loss_ratio = as_double();
  else if (e.key == "lr_wavelet") m.lr_wavelet = as_double();
  else if (e.key == "lr_main") m.lr_main = as_double();
  else if (e.key == "l1") m.l1 = as_double();
  else if (e.key == "l2") m.l2 = as_double();
  else if (e.key == "epochs") {
    m.epochs = as_int();
    rc.epochs_set = true;
  } else if (e.key == "batch_size") {
    m.batch_size = as_int();
    rc.batch_set = true;
  } else {
    throw_invalid(fmt::format("{}: unknown key '{}' in [model]", at, e.key));
  }
}

RunConfig parse_config(std::string_view text, std::string_view origin) {
  const KvDocument doc = parse_kv(text, origin);
  RunConfig rc;
  for (const auto& section : doc.sections) {
    const auto& name = section.name;
    if (name.empty()) {
      if (section.entries.empty()) continue;
      const auto& e = section.entries.front();
      throw_invalid(fmt::format("{}: key '{}' outside any section", where(origin, e), e.key));
    }
    if (name != "data" && name != "experiment" && name != "output" && name != "run" && name != "model") {
      throw_invalid(fmt::format("{}:{}: unknown section [{}]", origin, section.line, name));
    }
    for (const auto& e : section.entries) {
      const auto at = where(origin, e);
      const auto unknown = [&] { throw_invalid(fmt::format("{}: unknown key '{}' in [{}]", at, e.key, name)); };
      if (name == "data") {
        if (e.key == "manifest") rc.manifest = e.value;
        else if (e.key == "subjects") rc.subjects = parse_int_list(e.value, at + ": subjects");
        else if (e.key == "preprocess") rc.preprocess = parse_bool(e.value, at + ": preprocess");
        else unknown();
      } else if (name == "experiment") {
        if (e.key == "phase") rc.phase = data::parse_phase(e.value);
        else if (e.key == "component") rc.component = parse_ablation(e.value);
        else if (e.key == "baseline") rc.baseline = parse_bool(e.value, at + ": baseline");
        else if (e.key == "counts") rc.counts = parse_int_list(e.value, at + ": counts");
        else unknown();
      } else if (name == "output") {
        if (e.key == "dir") rc.out_dir = e.value;
        else if (e.key == "save_models") rc.save_models = parse_bool(e.value, at + ": save_models");
        else unknown();
      } else if (name == "run") {
        if (e.key == "seed") {
          const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), rc.seed);
          if (ec != std::errc{} || ptr != e.value.data() + e.value.size()) {
            throw_invalid(fmt::format("{}: bad seed '{}'", at, e.value));
          }
        } else if (e.key == "jobs") {
          rc.jobs = static_cast<int>(parse_int(e.value, at + ": jobs"));
        } else {
          unknown();
        }
      } else {
        apply_model_key(rc.model, rc, e, origin);
      }
    }
  }
  if (rc.jobs < 0) throw_invalid(fmt::format("{}: jobs must be non-negative", origin));
  return rc;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text, std::string_view origin) {
  try {
    return parse_config(text, origin);
  } catch (const Error& e) {
    // malformed values in a config are usage errors, not data errors
    if (e.kind() == ErrorKind::data) throw_invalid(e.what());
    throw;
  }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_invalid(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string RunConfig::to_text() const {
  const auto yes = [](bool b) { return b ? "true" : "false"; };
  std::string s;
  s += fmt::format("[data]\nmanifest = {}\nsubjects = {}\npreprocess = {}\n\n", manifest.string(),
                   fmt::join(subjects, ","), yes(preprocess));
  s += fmt::format("[experiment]\nphase = {}\ncomponent = {}\nbaseline = {}\ncounts = {}\n\n", data::to_string(phase),
                   to_string(component), yes(baseline), fmt::join(counts, ","));
  s += fmt::format("[output]\ndir = {}\nsave_models = {}\n\n", out_dir.string(), yes(save_models));
  s += fmt::format("[run]\nseed = {}\njobs = {}\n\n", seed, jobs);
  s += fmt::format(
      "[model]\nn_wavelet_kernels = {}\nwavelet_len = {}\nn_temporal_kernels = {}\ntemporal_len = {}\n"
      "dense_dims = {}\nloss_ratio = {}\nlr_wavelet = {}\nlr_main = {}\nl1 = {}\nl2 = {}\nepochs = {}\n"
      "batch_size = {}\n",
      model.n_wavelet_kernels, model.wavelet_len, model.n_temporal_kernels, model.temporal_len,
      fmt::join(model.dense_dims, ","), model.loss_ratio, model.lr_wavelet, model.lr_main, model.l1, model.l2,
      model.epochs, model.batch_size);
  return s;
}

}  // namespace ccsp::cli
