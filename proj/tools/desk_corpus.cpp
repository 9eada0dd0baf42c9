#include "desk_corpus.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ltsg/error.hpp"
#include "ltsg/random.hpp"

namespace ltsg::desk {

namespace {

using WordList = std::vector<const char*>;

struct Category {
  const char* name;
  std::vector<WordList> subtopics;
};

// Ambiguous words (screen, shot, power, virus, attack, operation, pressure,
// image, resolution, line, net, board, cell, state, bank, strike, goal)
// appear under more than one category.
const std::vector<Category>& categories() {
  static const std::vector<Category> kCategories = {
      {"comp.graphics",
       {
           {"image", "jpeg", "gif", "format", "convert", "pixel", "color", "compression",
            "tiff", "bitmap", "palette", "resolution", "file", "viewer", "quality", "bits",
            "png", "scanner"},
           {"polygon", "render", "shading", "raytrace", "texture", "vertex", "mesh", "light",
            "surface", "cell", "matrix", "transform", "camera", "scene", "triangle", "normal",
            "line", "curve"},
           {"card", "driver", "vga", "screen", "monitor", "video", "display", "memory",
            "board", "windows", "chip", "refresh", "mode", "accelerator", "speed", "diamond",
            "port", "install"},
           {"software", "package", "ftp", "archive", "version", "program", "source", "code",
            "library", "unix", "virus", "net", "download", "site", "tool", "editor",
            "utility", "release"},
       }},
      {"rec.sport.hockey",
       {
           {"game", "goal", "period", "shot", "score", "win", "overtime", "save", "net",
            "power", "play", "penalty", "minutes", "third", "tied", "lead", "pass", "ice"},
           {"team", "season", "playoff", "league", "division", "standings", "record", "points",
            "wings", "leafs", "bruins", "penguins", "rangers", "devils", "canucks", "cup",
            "final", "series"},
           {"player", "goalie", "defenseman", "center", "forward", "line", "coach", "trade",
            "contract", "rookie", "captain", "injury", "board", "draft", "prospect", "signed",
            "veteran", "strike"},
           {"fans", "arena", "tickets", "broadcast", "espn", "radio", "announcer", "crowd",
            "stadium", "coverage", "network", "highlights", "pressure", "chant", "seats",
            "replay", "station", "rink"},
       }},
      {"sci.med",
       {
           {"disease", "patient", "symptoms", "treatment", "diagnosis", "chronic", "pain",
            "infection", "virus", "cell", "immune", "syndrome", "fever", "bacteria", "attack",
            "heart", "blood", "pressure"},
           {"doctor", "physician", "hospital", "clinic", "surgery", "operation", "nurse",
            "medical", "care", "insurance", "board", "practice", "emergency", "screen",
            "specialist", "referral", "visit", "exam"},
           {"drug", "dose", "medication", "prescription", "side", "effects", "vitamin",
            "diet", "cancer", "therapy", "trial", "study", "shot", "vaccine", "antibiotic",
            "tablet", "dosage", "research"},
           {"health", "food", "msg", "sugar", "allergy", "reaction", "headache", "sleep",
            "exercise", "weight", "fat", "calcium", "state", "nutrition", "eating", "sodium",
            "intake", "skin"},
       }},
      {"talk.politics.mideast",
       {
           {"israel", "israeli", "arab", "palestinian", "jews", "territories", "occupied",
            "gaza", "bank", "west", "settlers", "land", "peace", "talks", "plo", "jerusalem",
            "state", "border"},
           {"turkish", "armenian", "armenians", "turkey", "genocide", "azerbaijan", "massacre",
            "history", "ottoman", "soviet", "russian", "greek", "village", "population",
            "kurds", "refugees", "attack", "killed"},
           {"government", "policy", "rights", "human", "law", "military", "army", "soldiers",
            "operation", "strike", "power", "regime", "resolution", "security", "forces",
            "war", "goal", "line"},
           {"iran", "iraq", "syria", "lebanon", "egypt", "jordan", "oil", "islamic", "muslim",
            "religion", "leaders", "elections", "image", "press", "media", "propaganda",
            "pressure", "net"},
       }},
  };
  return kCategories;
}

const WordList& function_words() {
  static const WordList kWords = {
      "the", "of", "and", "to", "a", "in", "is", "that", "it", "for", "on", "with", "as",
      "was", "be", "this", "are", "have", "not", "but", "by", "from", "at", "or", "they",
      "an", "there", "if", "can", "would", "all", "about", "which", "so", "will", "their",
      "has", "one", "what", "been",
  };
  return kWords;
}

const WordList& general_words() {
  static const WordList kWords = {
      "people", "think", "know", "time", "good", "year", "question", "point", "right",
      "article", "writes", "post", "said", "make", "read", "years", "problem", "believe",
      "really", "thing", "new", "information", "case", "number", "anyone", "thanks",
      "first", "day", "fact", "way", "work", "world", "group", "mail", "help", "idea",
      "seems", "different", "email", "reply",
  };
  return kWords;
}

// Zipf-like pick: index i with weight 1 / (i + 1).
std::size_t zipf_pick(std::size_t n, Rng& rng) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += 1.0 / static_cast<double>(i + 1);
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < n; ++i) {
    u -= 1.0 / static_cast<double>(i + 1);
    if (u < 0.0) return i;
  }
  return n - 1;
}

double gamma_draw(double shape, Rng& rng) {
  std::gamma_distribution<double> g(shape, 1.0);
  return g(rng);
}

}  // namespace

RawCorpus generate(const DeskCorpusOptions& options) {
  const auto& cats = categories();
  const auto& fwords = function_words();
  const auto& gwords = general_words();
  Rng rng(options.seed);

  // global subtopic index: (category, subtopic)
  std::vector<std::pair<std::size_t, std::size_t>> all_subtopics;
  for (std::size_t c = 0; c < cats.size(); ++c) {
    for (std::size_t s = 0; s < cats[c].subtopics.size(); ++s) all_subtopics.emplace_back(c, s);
  }

  RawCorpus corpus;
  for (const auto& cat : cats) corpus.label_names.emplace_back(cat.name);

  for (std::size_t c = 0; c < cats.size(); ++c) {
    for (int d = 0; d < options.docs_per_category; ++d) {
      // document mixture over all subtopics: most mass on its own category
      const double off_topic = 0.05 + 0.45 * uniform01(rng);
      std::vector<double> mix(all_subtopics.size(), 0.0);
      double own_total = 0.0, other_total = 0.0;
      for (std::size_t i = 0; i < all_subtopics.size(); ++i) {
        const double g = gamma_draw(all_subtopics[i].first == c ? 0.7 : 0.15, rng);
        mix[i] = g;
        (all_subtopics[i].first == c ? own_total : other_total) += g;
      }
      for (std::size_t i = 0; i < all_subtopics.size(); ++i) {
        if (all_subtopics[i].first == c) {
          mix[i] = own_total > 0.0 ? (1.0 - off_topic) * mix[i] / own_total : 0.0;
        } else {
          mix[i] = other_total > 0.0 ? off_topic * mix[i] / other_total : 0.0;
        }
      }

      std::string text;
      const int sentences = 3 + static_cast<int>(uniform_index(rng, 10));
      for (int s = 0; s < sentences; ++s) {
        double u = uniform01(rng);
        std::size_t pick = 0;
        for (; pick + 1 < mix.size(); ++pick) {
          u -= mix[pick];
          if (u < 0.0) break;
        }
        const auto& words = cats[all_subtopics[pick].first].subtopics[all_subtopics[pick].second];
        const int length = 6 + static_cast<int>(uniform_index(rng, 9));
        int partner = -1;
        for (int t = 0; t < length; ++t) {
          const double r = uniform01(rng);
          const char* word;
          if (r < 0.38) {
            word = fwords[zipf_pick(fwords.size(), rng)];
          } else if (r < 0.52) {
            word = gwords[zipf_pick(gwords.size(), rng)];
          } else {
            std::size_t idx;
            if (partner >= 0 && uniform01(rng) < 0.35) {
              idx = static_cast<std::size_t>(partner);
            } else {
              idx = zipf_pick(words.size(), rng);
            }
            word = words[idx];
            partner = static_cast<int>((idx + 1) % words.size());
          }
          if (!text.empty()) text += (t == 0 ? ". " : " ");
          text += word;
        }
      }
      text += ".";
      corpus.docs.push_back({std::move(text), static_cast<int>(c)});
    }
  }
  return corpus;
}

void write_dirs(const RawCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  for (const auto& name : corpus.label_names) {
    std::filesystem::create_directories(dir / name, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create " + (dir / name).string());
  }
  std::vector<int> counters(corpus.label_names.size(), 0);
  for (const auto& doc : corpus.docs) {
    char name[32];
    std::snprintf(name, sizeof(name), "%05d.txt", counters.at(doc.label)++);
    std::ofstream out(dir / corpus.label_names.at(doc.label) / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "cannot write under " + dir.string());
    out << doc.text << '\n';
  }
}

}  // namespace ltsg::desk
