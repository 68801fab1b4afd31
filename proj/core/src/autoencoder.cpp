#include "demoforge/filtering/autoencoder.hpp"

#include <algorithm>

#include "decimal.hpp"
#include "demoforge/error.hpp"

namespace demoforge {

std::size_t bottleneck_index(const std::vector<int>& hidden_dims) {
  if (hidden_dims.empty()) throw InvalidSpecError("autoencoder needs at least one hidden layer");
  return static_cast<std::size_t>(std::min_element(hidden_dims.begin(), hidden_dims.end()) - hidden_dims.begin());
}

Matrix Autoencoder::encode(const Matrix& samples) const {
  return nn::mlp_hidden_preactivation(net, norm.apply(samples), bottleneck_layer);
}

Matrix Autoencoder::reconstruct(const Matrix& samples) const {
  return norm.invert(nn::mlp_forward_batch(net, norm.apply(samples)));
}

Vector Autoencoder::reconstruction_error(const Matrix& samples) const {
  const Matrix z = norm.apply(samples);
  return (nn::mlp_forward_batch(net, z) - z).colwise().squaredNorm().transpose();
}

Autoencoder train_autoencoder(const Matrix& samples, const AutoencoderConfig& config, std::uint64_t seed) {
  if (samples.cols() == 0) throw EmptyBatchError("autoencoder training set is empty");
  const int dim = static_cast<int>(samples.rows());
  Autoencoder ae;
  ae.bottleneck_layer = bottleneck_index(config.hidden_dims);
  ae.norm = nn::Standardizer::fit(samples);
  ae.net = nn::mlp_init(nn::MlpSpec{dim, config.hidden_dims, dim}, seed);
  const Matrix z = ae.norm.apply(samples);
  Rng rng = make_rng(derive_seed(seed, "order"));
  nn::train_regression(ae.net, z, z, config.train, rng);
  return ae;
}

AutoencoderPair train_autoencoders(const DemoSet& demos, const AutoencoderConfig& config, std::uint64_t seed) {
  if (demos.empty()) throw EmptyBatchError("cannot train autoencoders on an empty demo set");
  return {train_autoencoder(demos.states(), config, derive_seed(seed, "phi_s")),
          train_autoencoder(demos.actions(), config, derive_seed(seed, "phi_a"))};
}

FeatureTable encode(const AutoencoderPair& ae, const DemoSet& demos) {
  return {ae.state.encode(demos.states()), ae.action.encode(demos.actions())};
}

nn::Checkpoint to_checkpoint(const Autoencoder& ae, const std::string& role) {
  return {role,
          ae.net,
          {{"norm_mean", detail::encode_vector(ae.norm.mean)}, {"norm_scale", detail::encode_vector(ae.norm.scale)}}};
}

Autoencoder autoencoder_from_checkpoint(const nn::Checkpoint& ckpt) {
  Autoencoder ae;
  ae.net = ckpt.model;
  ae.bottleneck_layer = bottleneck_index(ae.net.spec.hidden_dims);
  try {
    ae.norm = {detail::decode_vector(ckpt.attributes.at("norm_mean")),
               detail::decode_vector(ckpt.attributes.at("norm_scale"))};
  } catch (const std::out_of_range&) {
    throw FormatError("autoencoder checkpoint lacks normalization attributes");
  }
  if (ae.norm.dim() != ae.net.spec.input_dim) throw FormatError("autoencoder normalization dim mismatch");
  return ae;
}

}  // namespace demoforge
