#include "demoforge/nn/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "demoforge/error.hpp"
#include "json.hpp"

namespace demoforge {
namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

namespace nn {

namespace {

std::string serialize_params(const MlpModel& model) {
  std::string bytes;
  bytes.reserve(model.spec.parameter_count() * 4);
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    const Matrix& w = model.weights[i];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) detail::append_f32(bytes, w(r, c));
    }
    for (Eigen::Index r = 0; r < model.biases[i].size(); ++r) detail::append_f32(bytes, model.biases[i](r));
  }
  return bytes;
}

}  // namespace

std::string parameter_checksum(const MlpModel& model) {
  return detail::hex64(detail::fnv1a(serialize_params(model)));
}

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::filesystem::create_directories(dir);
  const MlpModel& m = ckpt.model;
  nlohmann::ordered_json manifest;
  manifest["format_version"] = kCheckpointFormat;
  manifest["role"] = ckpt.role;
  manifest["spec"] = {
      {"input_dim", m.spec.input_dim},
      {"hidden_dims", m.spec.hidden_dims},
      {"output_dim", m.spec.output_dim},
      {"hidden_activation", to_string(m.spec.hidden_activation)},
      {"output_activation", to_string(m.spec.output_activation)},
  };
  manifest["init_seed"] = m.init_seed;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    const auto rows = static_cast<std::size_t>(m.weights[i].rows());
    const auto cols = static_cast<std::size_t>(m.weights[i].cols());
    tensors.push_back({{"name", "layer" + std::to_string(i) + ".weight"},
                       {"shape", {rows, cols}},
                       {"offset", offset}});
    offset += rows * cols * 4;
    tensors.push_back({{"name", "layer" + std::to_string(i) + ".bias"}, {"shape", {rows}}, {"offset", offset}});
    offset += rows * 4;
  }
  manifest["tensors"] = tensors;
  manifest["attributes"] = ckpt.attributes;
  const std::string params = serialize_params(m);
  manifest["checksum"] = detail::hex64(detail::fnv1a(params));
  detail::write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  detail::write_file((dir / "params.bin").string(), params);
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(detail::read_file((dir / "manifest.json").string()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  const std::string version = manifest.value("format_version", "");
  if (version != kCheckpointFormat) {
    throw FormatError("unsupported checkpoint format version '" + version + "'");
  }
  Checkpoint ckpt;
  try {
    ckpt.role = manifest.at("role").get<std::string>();
    const auto& s = manifest.at("spec");
    MlpSpec spec;
    spec.input_dim = s.at("input_dim").get<int>();
    spec.hidden_dims = s.at("hidden_dims").get<std::vector<int>>();
    spec.output_dim = s.at("output_dim").get<int>();
    spec.hidden_activation = activation_from_string(s.at("hidden_activation").get<std::string>());
    spec.output_activation = activation_from_string(s.at("output_activation").get<std::string>());
    if (manifest.contains("attributes")) {
      ckpt.attributes = manifest.at("attributes").get<std::map<std::string, std::string>>();
    }

    const std::string params = detail::read_file((dir / "params.bin").string());
    const auto widths = spec.widths();
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    const auto& tensors = manifest.at("tensors");
    if (tensors.size() != 2 * spec.layer_count()) throw FormatError("tensor list does not match spec");
    for (std::size_t i = 0; i < spec.layer_count(); ++i) {
      const auto& wt = tensors.at(2 * i);
      const auto& bt = tensors.at(2 * i + 1);
      const auto rows = static_cast<Eigen::Index>(widths[i + 1]);
      const auto cols = static_cast<Eigen::Index>(widths[i]);
      const auto wshape = wt.at("shape").get<std::vector<std::size_t>>();
      const auto bshape = bt.at("shape").get<std::vector<std::size_t>>();
      if (wshape != std::vector<std::size_t>{static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)} ||
          bshape != std::vector<std::size_t>{static_cast<std::size_t>(rows)}) {
        throw FormatError("tensor shape disagrees with spec at layer " + std::to_string(i));
      }
      const auto woff = wt.at("offset").get<std::size_t>();
      const auto boff = bt.at("offset").get<std::size_t>();
      if (woff + static_cast<std::size_t>(rows * cols) * 4 > params.size() ||
          boff + static_cast<std::size_t>(rows) * 4 > params.size()) {
        throw FormatError("params.bin is truncated");
      }
      Matrix w(rows, cols);
      const char* p = params.data() + woff;
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c, p += 4) w(r, c) = detail::read_f32(p);
      }
      Vector b(rows);
      p = params.data() + boff;
      for (Eigen::Index r = 0; r < rows; ++r, p += 4) b(r) = detail::read_f32(p);
      weights.push_back(std::move(w));
      biases.push_back(std::move(b));
    }
    ckpt.model = MlpModel::from_parameters(spec, std::move(weights), std::move(biases));
    ckpt.model.init_seed = manifest.value("init_seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  return ckpt;
}

}  // namespace nn
}  // namespace demoforge
