#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgbt/fusion.hpp"
#include "rgbt/image.hpp"
#include "rgbt/nnet.hpp"

namespace rgbt::fusion {

struct MfNetConfig {
  int patch = 200;                        // square input patch side
  std::vector<int> stem_channels{8, 32, 256};  // stride-2 3x3 convs
  int head_channels = 256;                // width of the first layer of each head
  std::uint64_t seed = 1;

  friend bool operator==(const MfNetConfig&, const MfNetConfig&) = default;
};

/// Weight generator: frozen stem applied to each modality, a global head
/// producing the scalar w_G and a local head producing the map W_L.
///
/// global: conv 3x3 (2C -> head, stride 3, pad 1), relu, lrn, conv GxG -> 1, sigmoid
/// local:  deconv 3x3 (2C -> head, stride 2, pad 1), relu,
///         deconv 3x3 (head -> 1, stride 2, pad 1), bilinear resize to M x N, sigmoid
class MfNet {
 public:
  MfNet() = default;
  explicit MfNet(const MfNetConfig& cfg);

  nn::Network stem;
  nn::Network global_head;
  nn::Network local_head;

  int patch() const { return patch_; }
  int feature_size() const { return feature_size_; }
  int feature_channels() const { return 2 * stem_out_; }

  /// Rebuilds from the three networks of a checkpoint; validates layer shapes.
  static MfNet from_networks(std::vector<nn::Network> nets);

 private:
  int patch_ = 0;
  int feature_size_ = 0;
  int stem_out_ = 0;
};

void save_mfnet(const MfNet& net, const std::string& path);
MfNet load_mfnet(const std::string& path);

/// Image patch -> 3-channel tensor centred around zero (gray is replicated).
nn::Tensor to_tensor(const Image& patch);

/// Concatenated stem features of the two modality patches.
nn::Tensor stem_features(MfNet& net, const Image& p_rgb, const Image& p_t);

/// Head evaluation on cached stem features.
FusionWeights heads_forward(MfNet& net, const nn::Tensor& features, int map_w, int map_h);

/// Full forward pass; patches must be patch() x patch().
FusionWeights mfnet_forward(MfNet& net, const Image& p_rgb, const Image& p_t, int map_w, int map_h);

/// Training sample: label-frame patches, the desired response and the frozen
/// per-modality responses on the label frame.
struct TrainPair {
  Image p_rgb;
  Image p_t;
  Map y;
  Map r_rgb;
  Map r_t;

  friend bool operator==(const TrainPair&, const TrainPair&) = default;
};

enum class TrainStage { global, local, joint };

/// Squared Euclidean distance between the fused response and y, with
/// W_F = w_G (global stage) or w_G * W_L (later stages).
double pair_loss(MfNet& net, const nn::Tensor& features, const TrainPair& pair, TrainStage stage);

/// Loss plus backward pass; gradients (scaled by `scale`) accumulate in the
/// heads that the stage trains.
double pair_loss_backward(MfNet& net, const nn::Tensor& features, const TrainPair& pair, TrainStage stage,
                          double scale = 1.0);

struct StageSchedule {
  int epochs = 0;
  double lr = 0.0;

  friend bool operator==(const StageSchedule&, const StageSchedule&) = default;
};

struct TrainSchedule {
  StageSchedule global{4, 1e-5};
  StageSchedule local{4, 1e-5};
  StageSchedule joint{2, 1e-7};
  int batch = 8;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double lr_scale = 100.0;  // multiplies every stage rate; see README
  std::uint64_t seed = 1;

  friend bool operator==(const TrainSchedule&, const TrainSchedule&) = default;
};

struct EpochRecord {
  TrainStage stage;
  int epoch;
  double mean_loss;  // mean over pairs, measured during the epoch
};

struct TrainReport {
  double initial_loss = 0.0;  // full-model loss before training
  double final_loss = 0.0;    // full-model loss after training
  std::vector<EpochRecord> epochs;
};

std::string_view to_string(TrainStage stage);

TrainReport mfnet_train(MfNet& net, const std::vector<TrainPair>& data, const TrainSchedule& schedule);

/// Mean full-model loss over the data set.
double mean_loss(MfNet& net, const std::vector<TrainPair>& data);

/// Mean W_F entry over the data set.
double mean_weight(MfNet& net, const std::vector<TrainPair>& data);

// Training-pair cache: one binary record per pair ("TRP1" header followed by
// dimension fields and 32-bit float payloads).
void save_pair(const TrainPair& pair, const std::string& path);
TrainPair load_pair(const std::string& path);
void save_pairs(const std::vector<TrainPair>& pairs, const std::string& dir);
std::vector<TrainPair> load_pairs(const std::string& dir);

}  // namespace rgbt::fusion
