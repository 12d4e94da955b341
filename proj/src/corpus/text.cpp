#include "cxr/corpus/text.hpp"

#include <algorithm>
#include <set>

#include "cxr/error.hpp"

namespace cxr::corpus {

namespace {

bool is_punct(char c) { return c == '.' || c == ',' || c == ':'; }

bool is_kept(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || is_punct(c) || c == ' ';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

const char* const kSpecialTokens[] = {"<pad>", "<bos>", "<eos>", "<sep>", "<unk>"};

}  // namespace

std::string preprocess_text(std::string_view raw) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.compare(i, 3, "[**") == 0) {
      const auto close = raw.find("**]", i + 3);
      if (close != std::string_view::npos) {
        cleaned.push_back('_');
        i = close + 2;
        continue;
      }
    }
    char c = raw[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (is_space(c)) c = ' ';
    if (!is_kept(c)) continue;
    if (c == '_' && !cleaned.empty() && cleaned.back() == '_') continue;
    if (c == ' ' && (cleaned.empty() || cleaned.back() == ' ')) continue;
    cleaned.push_back(c);
  }
  while (!cleaned.empty() && cleaned.back() == ' ') cleaned.pop_back();
  return cleaned;
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (char c : text) {
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      flush();
      words.emplace_back(1, c);
    } else {
      current.push_back(c);
    }
  }
  flush();
  return words;
}

std::string join_tokens(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    const bool attach = w.size() == 1 && is_punct(w[0]);
    if (!out.empty() && !attach) out.push_back(' ');
    out += w;
  }
  return out;
}

Vocab::Vocab() {
  for (const char* s : kSpecialTokens) {
    ids_.emplace(s, static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(s);
  }
}

Vocab Vocab::from_words(const std::vector<std::string>& words) {
  Vocab v;
  const std::set<std::string> distinct(words.begin(), words.end());
  for (const auto& w : distinct) {
    if (v.ids_.count(w)) continue;
    v.ids_.emplace(w, static_cast<TokenId>(v.tokens_.size()));
    v.tokens_.push_back(w);
  }
  return v;
}

TokenId Vocab::id(std::string_view word) const {
  const auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DataError("token id " + std::to_string(id) + " outside vocabulary of size " + std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

nlohmann::json Vocab::to_json() const { return tokens_; }

Vocab Vocab::from_json(const nlohmann::json& j) {
  const auto tokens = j.get<std::vector<std::string>>();
  if (tokens.size() < static_cast<std::size_t>(kNumSpecial) ||
      !std::equal(std::begin(kSpecialTokens), std::end(kSpecialTokens), tokens.begin())) {
    throw DataError("vocabulary does not start with the reserved tokens");
  }
  Vocab v;
  for (std::size_t i = kNumSpecial; i < tokens.size(); ++i) {
    if (!v.ids_.emplace(tokens[i], static_cast<TokenId>(v.tokens_.size())).second) {
      throw DataError("duplicate vocabulary entry '" + tokens[i] + "'");
    }
    v.tokens_.push_back(tokens[i]);
  }
  return v;
}

TokenSeq tokenize(std::string_view text, const Vocab& vocab) {
  TokenSeq seq;
  for (const auto& w : split_tokens(text)) seq.push_back(vocab.id(w));
  return seq;
}

std::string detokenize(const TokenSeq& seq, const Vocab& vocab) {
  std::vector<std::string> words;
  for (TokenId id : seq) {
    if (vocab.is_special(id) && id != Vocab::kUnk) continue;
    words.push_back(vocab.token(id));
  }
  return join_tokens(words);
}

}  // namespace cxr::corpus
