#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace cxr::corpus {

using TokenId = std::int64_t;
using TokenSeq = std::vector<TokenId>;

/// Lowercases, turns de-identification spans ("___", "[** .. **]") into a
/// single "_", drops characters outside [a-z0-9_.,: ], collapses whitespace.
std::string preprocess_text(std::string_view raw);

/// Whitespace split with '.', ',' and ':' as standalone tokens.
std::vector<std::string> split_tokens(std::string_view text);
/// Space-joined, punctuation attached to the preceding word.
std::string join_tokens(const std::vector<std::string>& words);

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kSep = 3;
  static constexpr TokenId kUnk = 4;
  static constexpr TokenId kNumSpecial = 5;

  Vocab();
  /// Reserved tokens first, then the distinct words in sorted order.
  static Vocab from_words(const std::vector<std::string>& words);

  TokenId id(std::string_view word) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  bool is_special(TokenId id) const { return id >= 0 && id < kNumSpecial; }

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

TokenSeq tokenize(std::string_view text, const Vocab& vocab);
/// Skips PAD/BOS/EOS/SEP; UNK renders as "<unk>".
std::string detokenize(const TokenSeq& seq, const Vocab& vocab);

}  // namespace cxr::corpus
