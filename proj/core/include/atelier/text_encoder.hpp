#pragma once

#include <cstdint>
#include <vector>

#include <torch/nn.h>

namespace atelier::textenc {

struct TextEncoderOptions {
  std::int64_t vocab_size = 0;
  std::int64_t embed_dim = 300;
  std::int64_t hidden = 128;
};

/// Per-caption output: word_matrix is T x 2H (rows at or beyond `length` are
/// zero), sentence_vector is the concatenated final forward/backward state.
struct TextEmbedding {
  torch::Tensor word_matrix;
  torch::Tensor sentence_vector;
  std::int64_t length = 0;
};

/// Padded batch output: words B x T x 2H, sentence B x 2H, lengths B (int64).
struct BatchEmbedding {
  torch::Tensor words;
  torch::Tensor sentence;
  torch::Tensor lengths;
};

/// Bidirectional LSTM over word embeddings. Padding is handled by masking the
/// recurrent state updates, so trailing PAD tokens never influence the result.
class TextEncoderImpl : public torch::nn::Module {
 public:
  explicit TextEncoderImpl(TextEncoderOptions options);

  /// tokens: B x T int64 ids, lengths: B int64 effective lengths (>= 1).
  BatchEmbedding forward(const torch::Tensor& tokens, const torch::Tensor& lengths);

  std::int64_t output_dim() const { return 2 * options_.hidden; }
  const TextEncoderOptions& options() const { return options_; }

  torch::nn::Embedding embedding{nullptr};

 private:
  TextEncoderOptions options_;
  torch::nn::LSTMCell forward_cell_{nullptr};
  torch::nn::LSTMCell backward_cell_{nullptr};
};
TORCH_MODULE(TextEncoder);

/// Right-pads id sequences with PAD into a B x T tensor; returns (tokens, lengths).
std::pair<torch::Tensor, torch::Tensor> pad_batch(const std::vector<std::vector<std::int64_t>>& ids,
                                                  std::int64_t max_len = 0);

/// Encodes one caption. Trailing PAD ids are allowed and ignored; the
/// effective length is the number of ids before the first PAD.
TextEmbedding encode_caption(const std::vector<std::int64_t>& tokens, TextEncoder& encoder);

}  // namespace atelier::textenc
