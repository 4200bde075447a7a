#include "atelier/text_encoder.hpp"

#include <algorithm>

#include <torch/torch.h>

#include "atelier/error.hpp"
#include "atelier/text.hpp"
#include "atelier/vocabulary.hpp"

namespace atelier::textenc {

TextEncoderImpl::TextEncoderImpl(TextEncoderOptions options) : options_(options) {
  if (options_.vocab_size < 5) throw Error("text encoder needs a vocabulary beyond the specials");
  embedding = register_module(
      "embedding", torch::nn::Embedding(torch::nn::EmbeddingOptions(options_.vocab_size,
                                                                    options_.embed_dim)
                                            .padding_idx(dataset::Vocabulary::kPad)));
  forward_cell_ = register_module(
      "forward_cell", torch::nn::LSTMCell(options_.embed_dim, options_.hidden));
  backward_cell_ = register_module(
      "backward_cell", torch::nn::LSTMCell(options_.embed_dim, options_.hidden));
}

BatchEmbedding TextEncoderImpl::forward(const torch::Tensor& tokens, const torch::Tensor& lengths) {
  if (tokens.dim() != 2) throw Error("tokens must be B x T");
  const auto batch = tokens.size(0);
  const auto steps = tokens.size(1);
  if (steps < 1) throw Error("empty token sequence");
  if (lengths.min().item<std::int64_t>() < 1) throw Error("empty token sequence");
  if (tokens.min().item<std::int64_t>() < 0 ||
      tokens.max().item<std::int64_t>() >= options_.vocab_size) {
    throw Error("token id outside the vocabulary");
  }

  const auto x = embedding(tokens);  // B x T x E
  const auto opts = x.options();
  const auto positions = torch::arange(steps, lengths.options());
  // valid[b][t] = t < length[b]
  const auto valid = positions.unsqueeze(0).lt(lengths.unsqueeze(1)).unsqueeze(2);

  auto run = [&](torch::nn::LSTMCell& cell, bool reverse) {
    auto h = torch::zeros({batch, options_.hidden}, opts);
    auto c = torch::zeros({batch, options_.hidden}, opts);
    std::vector<torch::Tensor> outs(static_cast<std::size_t>(steps));
    for (std::int64_t i = 0; i < steps; ++i) {
      const std::int64_t t = reverse ? steps - 1 - i : i;
      auto [h_next, c_next] = cell(x.select(1, t), std::make_tuple(h, c));
      const auto m = valid.select(1, t);
      h = torch::where(m, h_next, h);
      c = torch::where(m, c_next, c);
      outs[static_cast<std::size_t>(t)] = torch::where(m, h_next, torch::zeros_like(h_next));
    }
    return std::make_pair(torch::stack(outs, 1), h);
  };

  auto [fwd_words, fwd_last] = run(forward_cell_, false);
  auto [bwd_words, bwd_last] = run(backward_cell_, true);
  return {torch::cat({fwd_words, bwd_words}, 2), torch::cat({fwd_last, bwd_last}, 1), lengths};
}

std::pair<torch::Tensor, torch::Tensor> pad_batch(const std::vector<std::vector<std::int64_t>>& ids,
                                                  std::int64_t max_len) {
  std::int64_t width = 1;
  for (const auto& s : ids) width = std::max<std::int64_t>(width, static_cast<std::int64_t>(s.size()));
  if (max_len > 0) width = std::min(width, max_len);
  auto tokens = torch::full({static_cast<std::int64_t>(ids.size()), width},
                            dataset::Vocabulary::kPad, torch::kInt64);
  auto lengths = torch::zeros({static_cast<std::int64_t>(ids.size())}, torch::kInt64);
  auto tok = tokens.accessor<std::int64_t, 2>();
  auto len = lengths.accessor<std::int64_t, 1>();
  for (std::size_t b = 0; b < ids.size(); ++b) {
    const auto n = std::min<std::int64_t>(width, static_cast<std::int64_t>(ids[b].size()));
    for (std::int64_t t = 0; t < n; ++t) tok[static_cast<std::int64_t>(b)][t] = ids[b][static_cast<std::size_t>(t)];
    len[static_cast<std::int64_t>(b)] = n;
  }
  return {tokens, lengths};
}

TextEmbedding encode_caption(const std::vector<std::int64_t>& tokens, TextEncoder& encoder) {
  const auto first_pad = std::find(tokens.begin(), tokens.end(), dataset::Vocabulary::kPad);
  const auto length = static_cast<std::int64_t>(first_pad - tokens.begin());
  if (length == 0) throw Error("empty token sequence");
  if (static_cast<std::size_t>(length) > text::kMaxCaptionLen) {
    throw Error("caption longer than " + std::to_string(text::kMaxCaptionLen) + " tokens");
  }
  auto ids = torch::tensor(tokens, torch::kInt64).unsqueeze(0);
  auto lengths = torch::tensor({length}, torch::kInt64);
  auto out = encoder->forward(ids, lengths);
  return {out.words.squeeze(0), out.sentence.squeeze(0), length};
}

}  // namespace atelier::textenc
