#include "demoforge/demos/demo_io.hpp"

#include <cstring>
#include <map>

#include "binary_io.hpp"
#include "demoforge/error.hpp"
#include "json_support.hpp"

namespace demoforge {

namespace {

constexpr char kMagic[8] = {'D', 'F', 'D', 'E', 'M', 'O', '0', '1'};

void append_matrix(std::string& buf, const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) detail::append_f32(buf, m(i, j));
  }
}

void append_mask(std::string& buf, const std::vector<std::uint8_t>& mask) {
  for (auto v : mask) detail::append_f32(buf, v ? 1.0 : 0.0);
}

}  // namespace

void save_demos(const std::filesystem::path& path, const DemoSet& demos) {
  std::string data;
  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  auto add_block = [&](const std::string& name, const std::string& dtype, std::size_t count, auto&& writer) {
    blocks.push_back({{"name", name}, {"dtype", dtype}, {"count", count}, {"offset", data.size()}});
    writer();
  };
  add_block("lengths", "u32", demos.lengths().size(), [&] {
    for (auto l : demos.lengths()) detail::append_u32(data, l);
  });
  const std::size_t n = demos.size();
  add_block("states", "f32", n * static_cast<std::size_t>(demos.state_dim()), [&] { append_matrix(data, demos.states()); });
  add_block("actions", "f32", n * static_cast<std::size_t>(demos.action_dim()), [&] { append_matrix(data, demos.actions()); });
  if (demos.has_ground_truth()) {
    add_block("clean_states", "f32", n * static_cast<std::size_t>(demos.state_dim()),
              [&] { append_matrix(data, demos.clean_states()); });
    add_block("clean_actions", "f32", n * static_cast<std::size_t>(demos.action_dim()),
              [&] { append_matrix(data, demos.clean_actions()); });
  }
  if (demos.has_masks()) {
    add_block("state_mask", "f32", n, [&] { append_mask(data, demos.state_mask()); });
    add_block("action_mask", "f32", n, [&] { append_mask(data, demos.action_mask()); });
  }

  nlohmann::ordered_json meta;
  meta["format_version"] = kDemoFormat;
  meta["state_dim"] = demos.state_dim();
  meta["action_dim"] = demos.action_dim();
  meta["env"] = demos.meta().env;
  meta["generation_seed"] = demos.meta().generation_seed;
  meta["noise"] = demos.meta().noise ? detail::noise_to_json(*demos.meta().noise) : nlohmann::ordered_json(nullptr);
  meta["pair_count"] = n;
  meta["trajectory_count"] = demos.trajectory_count();
  meta["blocks"] = blocks;
  const std::string meta_bytes = meta.dump();

  std::string out(kMagic, sizeof(kMagic));
  detail::append_u64(out, meta_bytes.size());
  out += meta_bytes;
  out += data;
  detail::write_file(path.string(), out);
}

DemoSet load_demos(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path.string());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("'" + path.string() + "' is not a demoforge demo archive");
  }
  const std::uint64_t meta_len = detail::read_u64(bytes.data() + 8);
  if (16 + meta_len > bytes.size()) throw FormatError("demo archive meta block is truncated");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(bytes.substr(16, meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed demo meta.json: " + std::string(e.what()));
  }
  if (meta.value("format_version", "") != kDemoFormat) {
    throw FormatError("unsupported demo format version '" + meta.value("format_version", "") + "'");
  }
  const char* data = bytes.data() + 16 + meta_len;
  const std::size_t data_len = bytes.size() - 16 - meta_len;

  try {
    const int ds = meta.at("state_dim").get<int>();
    const int da = meta.at("action_dim").get<int>();
    const auto n = meta.at("pair_count").get<std::size_t>();
    std::map<std::string, std::pair<std::size_t, std::size_t>> index;  // name -> (offset, count)
    for (const auto& b : meta.at("blocks")) {
      const auto off = b.at("offset").get<std::size_t>();
      const auto count = b.at("count").get<std::size_t>();
      if (off + count * 4 > data_len) throw FormatError("demo block '" + b.at("name").get<std::string>() + "' is truncated");
      index[b.at("name").get<std::string>()] = {off, count};
    }
    auto block = [&](const std::string& name) -> std::pair<const char*, std::size_t> {
      auto it = index.find(name);
      if (it == index.end()) throw FormatError("demo archive lacks block '" + name + "'");
      return {data + it->second.first, it->second.second};
    };
    auto read_matrix = [&](const std::string& name, int rows) {
      auto [p, count] = block(name);
      if (count != n * static_cast<std::size_t>(rows)) throw FormatError("block '" + name + "' has the wrong size");
      Matrix m(rows, static_cast<Eigen::Index>(n));
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < rows; ++i, p += 4) m(i, j) = detail::read_f32(p);
      }
      return m;
    };
    auto read_mask = [&](const std::string& name) {
      auto [p, count] = block(name);
      if (count != n) throw FormatError("block '" + name + "' has the wrong size");
      std::vector<std::uint8_t> mask(n);
      for (std::size_t i = 0; i < n; ++i, p += 4) mask[i] = detail::read_f32(p) != 0.0f ? 1 : 0;
      return mask;
    };
    auto [lp, lcount] = block("lengths");
    std::vector<std::uint32_t> lengths(lcount);
    for (std::size_t i = 0; i < lcount; ++i, lp += 4) lengths[i] = detail::read_u32(lp);

    DemoSet demos = n == 0 ? DemoSet(ds, da)
                           : DemoSet::from_columns(read_matrix("states", ds), read_matrix("actions", da), std::move(lengths));
    if (index.count("clean_states")) demos.set_ground_truth(read_matrix("clean_states", ds), read_matrix("clean_actions", da));
    if (index.count("state_mask")) demos.set_masks(read_mask("state_mask"), read_mask("action_mask"));
    demos.meta().env = meta.value("env", "");
    demos.meta().generation_seed = meta.value("generation_seed", std::uint64_t{0});
    if (meta.contains("noise") && !meta.at("noise").is_null()) demos.meta().noise = detail::noise_from_json(meta.at("noise"));
    return demos;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed demo meta.json: " + std::string(e.what()));
  }
}

}  // namespace demoforge
