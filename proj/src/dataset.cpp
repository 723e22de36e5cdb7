#include "gait/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "gait/rng.hpp"

namespace gait {

SplitAssignment split_labeled_ids(
    const std::vector<std::pair<std::string, SessionLabel>>& ids,
    const SplitFractions& fractions, uint64_t seed) {
  const double sum = fractions.train + fractions.validation + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error("split fractions must sum to 1");

  std::vector<std::string> sound, lame;
  for (const auto& [id, label] : ids) {
    switch (label) {
      case SessionLabel::Sound: sound.push_back(id); break;
      case SessionLabel::Lame: lame.push_back(id); break;
      case SessionLabel::Unknown:
        throw Error("session " + id +
                    " has label 'unknown'; unlabeled sessions cannot be split");
    }
  }
  if (sound.size() + lame.size() < 5)
    throw Error("at least 5 labeled sessions required, got " +
                std::to_string(sound.size() + lame.size()));

  SplitAssignment out;
  out.seed = seed;
  Rng rng(seed);

  // Fixed stratum order (sound, then lame) and sorted ids inside each
  // stratum make the result independent of caller ordering.
  auto assign_stratum = [&](std::vector<std::string>& stratum,
                            const char* label_name) {
    std::sort(stratum.begin(), stratum.end());
    const size_t n = stratum.size();
    const auto n_val =
        static_cast<size_t>(std::floor(fractions.validation * n));
    const auto n_test = static_cast<size_t>(std::floor(fractions.test * n));
    if (n_val == 0 || n_test == 0 || n_val + n_test >= n)
      throw Error(std::string("label stratum '") + label_name + "' has " +
                  std::to_string(n) + " sessions; too few for a " +
                  "train/validation/test split");
    rng.shuffle(stratum);
    for (size_t i = 0; i < n; ++i) {
      Split s = i < n_val                ? Split::Validation
                : i < n_val + n_test     ? Split::Test
                                         : Split::Train;
      out.by_session.emplace(stratum[i], s);
    }
  };
  assign_stratum(sound, "sound");
  assign_stratum(lame, "lame");

  if (out.by_session.size() != ids.size())
    throw Error("duplicate session ids in split input");
  return out;
}

SplitAssignment split_sessions(const std::vector<SensorSession>& sessions,
                               const SplitFractions& fractions,
                               uint64_t seed) {
  std::vector<std::pair<std::string, SessionLabel>> ids;
  ids.reserve(sessions.size());
  for (const auto& s : sessions) ids.emplace_back(s.session_id, s.label);
  return split_labeled_ids(ids, fractions, seed);
}

ClassWeights compute_class_weights_from_counts(long n_sound, long n_lame) {
  if (n_sound <= 0 || n_lame <= 0)
    throw Error("class weights undefined: need strides of both labels, got " +
                std::to_string(n_sound) + " sound / " + std::to_string(n_lame) +
                " lame");
  const double total = static_cast<double>(n_sound + n_lame);
  return {total / (2.0 * n_sound), total / (2.0 * n_lame)};
}

ClassWeights compute_class_weights(const std::vector<Stride>& train_strides) {
  long n_sound = 0, n_lame = 0;
  for (const auto& s : train_strides) {
    if (!s.lame)
      throw Error("stride from session " + s.session_id +
                  " has no label; cannot weight");
    (*s.lame ? n_lame : n_sound)++;
  }
  return compute_class_weights_from_counts(n_sound, n_lame);
}

}  // namespace gait
