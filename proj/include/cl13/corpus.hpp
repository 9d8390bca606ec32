#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cl13 {

struct CorpusEntry {
  std::string id;
  std::string text;
  std::optional<bool> provable;  // known CL13 verdict, when the literature states it
};

inline const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = [] {
    std::vector<CorpusEntry> v;
    struct Or {
      const char* name;
      const char* tok;
      bool lem, commute, contract;
    };
    const Or ors[] = {{"par", "|", true, true, false},
                      {"tog", "%|", false, true, false},
                      {"seq", "$|", false, false, false},
                      {"cho", "!|", false, true, true}};
    for (const auto& o : ors) {
      std::string t = o.tok;
      v.push_back({"excluded-middle/" + std::string(o.name), "~P " + t + " P", o.lem});
      v.push_back({"commute/" + std::string(o.name), "(P " + t + " Q) -> (Q " + t + " P)", o.commute});
      v.push_back({"contract/" + std::string(o.name), "(P " + t + " P) -> P", o.contract});
      v.push_back({"contract-elem/" + std::string(o.name), "(p " + t + " p) -> p", true});
    }

    v.push_back({"approximable-intersection", "((p %& ~p) | (q %& ~q)) | ((~p | ~q) %| (p & q))", true});

    // P AND1 Q -> P AND2 Q is provable iff AND1 is left of AND2; same for the ORs.
    const char* ands[][2] = {{"par", "&"}, {"tog", "%&"}, {"seq", "$&"}, {"cho", "!&"}};
    const char* orl[][2] = {{"cho", "!|"}, {"seq", "$|"}, {"tog", "%|"}, {"par", "|"}};
    for (auto* list : {&ands, &orl}) {
      const std::string kind = list == &ands ? "and" : "or";
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          if (i == j) continue;
          v.push_back({"ladder-" + kind + "/" + (*list)[i][0] + "-" + (*list)[j][0],
                       "(P " + std::string((*list)[i][1]) + " Q) -> (P " + (*list)[j][1] + " Q)", i < j});
        }
    }

    v.push_back({"seq-decides-cho/elem", "(~p $| p) & (p $| ~p) -> ~p !| p", true});
    v.push_back({"seq-decides-cho/gen", "(~P $| P) & (P $| ~P) -> ~P !| P", true});
    v.push_back({"blass", "((~P | ~Q) & (~R | ~S)) | ((P | R) & (Q | S))", true});

    v.push_back({"top", "1", true});
    v.push_back({"bot", "0", false});
    v.push_back({"tog-excluded-middle/elem", "~p %| p", false});
    v.push_back({"seq-excluded-middle/elem", "~p $| p", std::nullopt});
    v.push_back({"cho-excluded-middle/elem", "~p !| p", std::nullopt});
    v.push_back({"cho-conjunction/elem", "p !& q", std::nullopt});
    v.push_back({"seq-commute/elem", "(p $| q) -> (q $| p)", std::nullopt});
    v.push_back({"tog-seq/elem", "(p $& q) -> (p %& q)", std::nullopt});
    v.push_back({"tog-pair/elem", "(p %& ~p) | (q %| ~q)", std::nullopt});
    v.push_back({"mixed/elem", "(p !| ~q) | (q $& (r %| ~r))", std::nullopt});
    return v;
  }();
  return entries;
}

}  // namespace cl13
