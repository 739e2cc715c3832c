#include "btx/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>
#include <string>

#include "btx/rng.hpp"
#include "btx/utf8.hpp"

namespace btx {

namespace {

using Vec = std::vector<double>;

constexpr int kMaxRedraws = 1000;

double dotd(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec normalized(Vec v) {
  const double n = std::sqrt(dotd(v, v));
  for (double& x : v) x /= n;
  return v;
}

Vec random_unit(Rng& rng, std::size_t dim) {
  Vec v(dim);
  for (double& x : v) x = rng.normal();
  return normalized(std::move(v));
}

// Random unit vector orthogonal to every (unit) vector in `basis`.
Vec random_orthogonal(Rng& rng, std::size_t dim, std::initializer_list<const Vec*> basis) {
  for (;;) {
    Vec e(dim);
    for (double& x : e) x = rng.normal();
    for (const Vec* b : basis) {
      const double p = dotd(e, *b);
      for (std::size_t i = 0; i < dim; ++i) e[i] -= p * (*b)[i];
    }
    if (std::sqrt(dotd(e, e)) > 1e-6) return normalized(std::move(e));
  }
}

// Unit vector at cosine exactly `c` from unit vector s.
Vec at_cosine(Rng& rng, const Vec& s, double c) {
  const Vec e = random_orthogonal(rng, s.size(), {&s});
  Vec t(s.size());
  const double q = std::sqrt(1.0 - c * c);
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = c * s[i] + q * e[i];
  return normalized(std::move(t));
}

double draw_clean_cos(Rng& rng, double cos_min) {
  // Keep clear of the bound so float rounding cannot cross it.
  const double lo = cos_min + 1e-4;
  return std::min(rng.uniform(lo, lo + 0.9 * (1.0 - lo)), 1.0);
}

EmbeddingMatrix to_matrix(const std::vector<Vec>& rows, std::size_t dim) {
  std::vector<float> data;
  data.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    for (double x : r) data.push_back(static_cast<float>(x));
  }
  return EmbeddingMatrix(rows.size(), dim, std::move(data), true);
}

double max_cos_against(const Vec& v, const std::vector<Vec>& others) {
  double m = -1.0;
  for (const auto& o : others) m = std::max(m, dotd(v, o));
  return m;
}

// Redraws noise rows on each side until every one has cosine <= limit to
// every row on the other side. `draw` produces a fresh candidate row.
template <typename Draw>
void enforce_noise_bound(std::vector<Vec>& src, std::vector<Vec>& tgt, const std::vector<std::size_t>& noise_src,
                         const std::vector<std::size_t>& noise_tgt, double limit, Draw&& draw) {
  const double margin = limit - 1e-6;
  for (int round = 0;; ++round) {
    if (round > 50) throw std::invalid_argument("synthetic: cannot satisfy noise cosine bound; increase dim");
    bool changed = false;
    auto fix = [&](std::vector<Vec>& rows, const std::vector<Vec>& other, const std::vector<std::size_t>& idx) {
      for (std::size_t r : idx) {
        int tries = 0;
        while (max_cos_against(rows[r], other) > margin) {
          if (++tries > kMaxRedraws) throw std::invalid_argument("synthetic: cannot satisfy noise cosine bound; increase dim");
          rows[r] = draw();
          changed = true;
        }
      }
    };
    fix(src, tgt, noise_src);
    fix(tgt, src, noise_tgt);
    if (!changed) return;
  }
}

std::string khmer_word(std::uint64_t v) {
  std::u32string w;
  do {
    w.push_back(static_cast<char32_t>(0x1780 + v % 35));
    v /= 35;
  } while (v);
  return utf8::encode(w);
}

constexpr const char* kVocab[] = {"the",   "page",  "about", "us",     "service", "office", "report", "public",
                                  "water", "road",  "news",  "health", "school",  "market", "city",   "law",
                                  "help",  "river", "rice",  "field",  "letter",  "paper",  "open",   "close"};

std::string english_sentence(Rng& rng, const std::string& tag) {
  std::string s = tag;
  const auto words = 3 + rng.index(10);
  for (std::uint64_t w = 0; w < words; ++w) {
    s += ' ';
    s += kVocab[rng.index(std::size(kVocab))];
  }
  return s;
}

std::string khmer_sentence(Rng& rng, std::uint64_t id) {
  std::string s = khmer_word(id + 35 * 35);
  const auto words = 3 + rng.index(8);
  for (std::uint64_t w = 0; w < words; ++w) s += ' ' + khmer_word(rng.index(35 * 35));
  return s;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (dim < 2) throw std::invalid_argument("synthetic: dim must be >= 2");
  if (!(clean_cos_min > noise_cos_max)) throw std::invalid_argument("synthetic: clean_cos_min must exceed noise_cos_max");
  if (!(clean_cos_min < 1.0)) throw std::invalid_argument("synthetic: clean_cos_min must be < 1");
  if (!(insert_rate >= 0.0 && insert_rate < 1.0) || !(merge_rate >= 0.0 && merge_rate < 1.0) ||
      !(insert_rate + merge_rate < 1.0)) {
    throw std::invalid_argument("synthetic: rates must lie in [0, 1) and sum below 1");
  }
}

std::string join_block_text(const std::vector<std::string>& sentences, IndexBlock b) {
  std::string s;
  for (std::size_t i = b.first; i < b.end(); ++i) {
    if (i != b.first) s += ' ';
    s += sentences.at(i);
  }
  return s;
}

SyntheticCorpus gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0x73796e));
  std::vector<Vec> src, tgt;
  std::vector<std::size_t> noise_src, noise_tgt;
  SyntheticCorpus out;

  for (std::size_t step = 0; step < spec.n_pairs; ++step) {
    const double u = rng.uniform();
    const std::size_t i = src.size(), j = tgt.size();
    if (u < spec.insert_rate) {
      noise_src.push_back(i);
      noise_tgt.push_back(j);
      src.push_back(random_unit(rng, spec.dim));
      tgt.push_back(random_unit(rng, spec.dim));
      out.gold.links.push_back({IndexBlock{i, 1}, IndexBlock{j, 0}, 0.0});
      out.gold.links.push_back({IndexBlock{i + 1, 0}, IndexBlock{j, 1}, 0.0});
    } else if (u < spec.insert_rate + spec.merge_rate) {
      const Vec a = random_unit(rng, spec.dim);
      const Vec b = random_unit(rng, spec.dim);
      Vec t(spec.dim);
      for (std::size_t d = 0; d < spec.dim; ++d) t[d] = a[d] + b[d];
      src.push_back(a);
      src.push_back(b);
      tgt.push_back(normalized(std::move(t)));
      out.gold.links.push_back({IndexBlock{i, 2}, IndexBlock{j, 1}, 0.0});
    } else {
      src.push_back(random_unit(rng, spec.dim));
      tgt.push_back(at_cosine(rng, src.back(), draw_clean_cos(rng, spec.clean_cos_min)));
      out.gold.links.push_back({IndexBlock{i, 1}, IndexBlock{j, 1}, 0.0});
    }
  }
  enforce_noise_bound(src, tgt, noise_src, noise_tgt, spec.noise_cos_max, [&] { return random_unit(rng, spec.dim); });

  out.src_embs = to_matrix(src, spec.dim);
  out.tgt_embs = to_matrix(tgt, spec.dim);

  Rng text_rng(derive_seed(spec.seed, 0x74657874));
  for (std::size_t i = 0; i < src.size(); ++i) out.src_sentences.push_back(khmer_sentence(text_rng, i));
  for (std::size_t j = 0; j < tgt.size(); ++j) out.tgt_sentences.push_back(english_sentence(text_rng, "t" + std::to_string(j)));

  std::vector<float> cs, ct;
  auto add_candidate = [&](IndexBlock s, IndexBlock t, bool clean) {
    out.candidates.push_back({join_block_text(out.src_sentences, s), join_block_text(out.tgt_sentences, t)});
    out.candidate_clean.push_back(clean);
    const auto a = block_embed(out.src_embs, s);
    const auto b = block_embed(out.tgt_embs, t);
    cs.insert(cs.end(), a.begin(), a.end());
    ct.insert(ct.end(), b.begin(), b.end());
  };
  for (std::size_t k = 0; k < out.gold.links.size(); ++k) {
    const auto& l = out.gold.links[k];
    if (!l.is_null()) {
      add_candidate(l.src, l.tgt, true);
    } else if (!l.src.empty()) {
      // Null source link of a noise insert; its target mate is the next link.
      add_candidate(l.src, out.gold.links[k + 1].tgt, false);
    }
  }
  out.candidate_src_embs = EmbeddingMatrix(out.candidates.size(), spec.dim, std::move(cs), true);
  out.candidate_tgt_embs = EmbeddingMatrix(out.candidates.size(), spec.dim, std::move(ct), true);
  return out;
}

LabeledPairs gen_labeled_pairs(std::size_t n_clean, std::size_t n_noise, std::size_t dim, double clean_cos_min,
                               double noise_cos_max, std::uint64_t seed) {
  SyntheticSpec{1, dim, clean_cos_min, noise_cos_max, 0.0, 0.0, seed}.validate();
  Rng rng(derive_seed(seed, 0x6c6162));
  std::vector<bool> clean(n_clean + n_noise, false);
  std::fill_n(clean.begin(), n_clean, true);
  for (std::size_t i = clean.size(); i > 1; --i) {
    const std::size_t j = rng.index(i);
    const bool tmp = clean[i - 1];
    clean[i - 1] = clean[j];
    clean[j] = tmp;
  }

  std::vector<Vec> src, tgt;
  std::vector<std::size_t> noise_rows;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    src.push_back(random_unit(rng, dim));
    if (clean[i]) {
      tgt.push_back(at_cosine(rng, src.back(), draw_clean_cos(rng, clean_cos_min)));
    } else {
      tgt.push_back(random_unit(rng, dim));
      noise_rows.push_back(i);
    }
  }
  enforce_noise_bound(src, tgt, noise_rows, noise_rows, noise_cos_max, [&] { return random_unit(rng, dim); });
  return LabeledPairs{to_matrix(src, dim), to_matrix(tgt, dim), std::move(clean)};
}

LabeledPairs gen_separable_pairs(std::size_t n, std::size_t dim, double clean_cos_min, double cross_cos_max,
                                 std::uint64_t seed) {
  if (dim <= n) throw std::invalid_argument("separable pairs: dim must exceed the number of pairs");
  if (!(clean_cos_min > cross_cos_max) || !(clean_cos_min < 1.0)) {
    throw std::invalid_argument("separable pairs: need cross_cos_max < clean_cos_min < 1");
  }
  Rng rng(derive_seed(seed, 0x736570));
  // Orthonormal sources (Gram-Schmidt), targets leaning off the source span.
  std::vector<Vec> src;
  for (std::size_t i = 0; i < n; ++i) {
    for (;;) {
      Vec v = random_unit(rng, dim);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : src) {
          const double p = dotd(v, b);
          for (std::size_t d = 0; d < dim; ++d) v[d] -= p * b[d];
        }
      }
      if (std::sqrt(dotd(v, v)) > 1e-3) {
        src.push_back(normalized(std::move(v)));
        break;
      }
    }
  }
  std::vector<Vec> tgt;
  for (std::size_t i = 0; i < n; ++i) {
    Vec e = random_unit(rng, dim);
    for (const auto& b : src) {
      const double p = dotd(e, b);
      for (std::size_t d = 0; d < dim; ++d) e[d] -= p * b[d];
    }
    e = normalized(std::move(e));
    const double c = draw_clean_cos(rng, clean_cos_min);
    const double q = std::sqrt(1.0 - c * c);
    Vec t(dim);
    for (std::size_t d = 0; d < dim; ++d) t[d] = c * src[i][d] + q * e[d];
    tgt.push_back(normalized(std::move(t)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && dotd(tgt[i], src[j]) > cross_cos_max) {
        throw std::invalid_argument("separable pairs: cross cosine bound violated");
      }
    }
  }
  return LabeledPairs{to_matrix(src, dim), to_matrix(tgt, dim), std::vector<bool>(n, true)};
}

HubCorpus gen_hub_corpus(std::size_t n_clean, std::size_t n_noise, std::size_t n_hub, std::size_t dim,
                         std::uint64_t seed) {
  if (n_hub > n_noise) throw std::invalid_argument("hub corpus: more hub pairs than noise pairs");
  if (dim < 8) throw std::invalid_argument("hub corpus: dim must be >= 8");
  Rng rng(derive_seed(seed, 0x687562));
  const Vec hub = random_unit(rng, dim);

  std::vector<bool> clean(n_clean + n_noise, false);
  std::fill_n(clean.begin(), n_clean, true);
  for (std::size_t i = clean.size(); i > 1; --i) {
    const std::size_t j = rng.index(i);
    const bool tmp = clean[i - 1];
    clean[i - 1] = clean[j];
    clean[j] = tmp;
  }
  std::vector<std::size_t> noise_rows;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (!clean[i]) noise_rows.push_back(i);
  }
  std::vector<std::size_t> hub_rows(noise_rows.begin(), noise_rows.begin() + static_cast<std::ptrdiff_t>(n_hub));

  // Source = a * hub + sqrt(1 - a^2) * (direction orthogonal to hub).
  auto source_with_hub_cos = [&](double a) {
    const Vec r = random_orthogonal(rng, dim, {&hub});
    Vec s(dim);
    for (std::size_t d = 0; d < dim; ++d) s[d] = a * hub[d] + std::sqrt(1.0 - a * a) * r[d];
    return normalized(std::move(s));
  };

  std::vector<Vec> src, tgt;
  std::size_t next_hub = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const bool is_hub = next_hub < hub_rows.size() && hub_rows[next_hub] == i;
    src.push_back(source_with_hub_cos(is_hub ? rng.uniform(0.93, 0.98) : rng.uniform(0.6, 0.7)));
    if (clean[i]) {
      tgt.push_back(at_cosine(rng, src.back(), draw_clean_cos(rng, 0.9)));
    } else if (is_hub) {
      tgt.push_back(hub);
      ++next_hub;
    } else {
      tgt.push_back(random_orthogonal(rng, dim, {&hub}));
    }
  }
  std::vector<std::size_t> plain_noise;
  std::set_difference(noise_rows.begin(), noise_rows.end(), hub_rows.begin(), hub_rows.end(),
                      std::back_inserter(plain_noise));
  const std::vector<std::size_t> none;
  enforce_noise_bound(src, tgt, none, plain_noise, 0.3, [&] { return random_orthogonal(rng, dim, {&hub}); });

  HubCorpus out{LabeledPairs{to_matrix(src, dim), to_matrix(tgt, dim), std::move(clean)}, std::move(hub_rows), {}};
  for (double x : hub) out.hub.push_back(static_cast<float>(x));
  return out;
}

}  // namespace btx
