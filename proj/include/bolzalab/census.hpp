#pragma once

#include "bolzalab/core.hpp"
#include "bolzalab/group.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace bolza {

/*
    Primitive closed geodesics up to length L, enumerated through conjugacy
    classes of hyperbolic elements: length = 2 arccosh(|tr|/2).

    Enumeration walks all reduced words up to a length bound implied by L
    (ceil(L / ell_min_per_letter), calibrated from the generator translation
    lengths; completeness is checked by a stability gate in the tests).

    The octagon presentation is C'(1/8), so Dehn's algorithm applies: a word
    containing more than half of a cyclic rotation of the relator (or its
    inverse) is not a geodesic spelling and can be shortened by swapping the
    piece for the inverse of the complement.  The canonical form of a class
    is therefore computed on the closure of the cyclic word under

        - cyclic rotation and inversion,
        - half-relator swaps (length-4 pieces, equal length),

    after shortening away all pieces of length >= 5; the representative is
    the lexicographic minimum of the orbit.  DFS branches whose last five
    letters already form a >= 5 piece are pruned, which both speeds up the
    walk and never loses a class (a minimal spelling contains no such piece).

    A trace-clustering pass remains as a safety net: equal traces can still
    be genuinely distinct classes (the Bolza length spectrum has high
    multiplicities), so clusters are only flagged, and a record is merged
    only when an explicit conjugator certificate gamma M1 gamma^-1 = +-M2
    turns up in a short ball.
*/

struct GeodesicRecord {
    Word word;            // canonical cyclically-reduced spelling
    double trace = 0.0;   // |tr| of the word matrix
    double length = 0.0;  // 2 arccosh(|tr|/2)
    bool primitive = true;
    bool merged_respelling = false;  // absorbed a conjugate re-spelling
    bool ambiguous_cluster = false;  // equal trace, no certificate found
    GroupElement matrix;
    GroupElement axis_frame;  // S with  M S = +- S exp(length * A)
};

inline std::string word_string(const Word& w) {
    std::string s;
    for (uint8_t l : w) s += static_cast<char>(l < 4 ? 'a' + l : 'A' + (l - 4));
    return s;
}

namespace detail {

inline Word rotate_word(const Word& w, size_t k) {
    Word r(w.size());
    for (size_t i = 0; i < w.size(); ++i) r[i] = w[(i + k) % w.size()];
    return r;
}

inline Word invert_word(const Word& w) {
    Word r(w.size());
    for (size_t i = 0; i < w.size(); ++i) r[i] = inverse_letter(w[w.size() - 1 - i]);
    return r;
}

// cyclic free reduction: cancel adjacent (also wrap-around) inverse pairs
inline Word cyclic_free_reduce(Word w) {
    bool changed = true;
    while (changed && w.size() >= 2) {
        changed = false;
        for (size_t i = 0; i + 1 < w.size(); ++i) {
            if (w[i] == inverse_letter(w[i + 1])) {
                w.erase(w.begin() + static_cast<long>(i), w.begin() + static_cast<long>(i) + 2);
                changed = true;
                break;
            }
        }
        if (!changed && w.size() >= 2 && w.back() == inverse_letter(w.front())) {
            w.erase(w.begin());
            w.pop_back();
            changed = true;
        }
    }
    return w;
}

// all cyclic rotations of the relator and of its inverse
inline std::vector<Word> relator_rotations(const Word& relator) {
    std::vector<Word> r;
    Word inv = invert_word(relator);
    for (size_t k = 0; k < relator.size(); ++k) {
        r.push_back(rotate_word(relator, k));
        r.push_back(rotate_word(inv, k));
    }
    return r;
}

// If w contains (cyclically, starting at i) the first p letters of a relator
// rotation r = P Q, replace P by Q^{-1}.  p > 4 shortens, p = 4 keeps length.
inline bool apply_piece_swap(const Word& w, size_t i, const Word& r, size_t p, Word& out) {
    size_t n = w.size();
    if (p > n) return false;
    for (size_t j = 0; j < p; ++j)
        if (w[(i + j) % n] != r[j]) return false;
    Word q(r.begin() + static_cast<long>(p), r.end());
    Word rep = invert_word(q);
    out.clear();
    out.insert(out.end(), rep.begin(), rep.end());
    for (size_t j = p; j < n; ++j) out.push_back(w[(i + j) % n]);
    out = cyclic_free_reduce(std::move(out));
    return true;
}

}  // namespace detail

// p-periodicity of the cyclic word under any rotation
inline bool is_proper_power(const Word& w) {
    size_t n = w.size();
    for (size_t p = 1; p <= n / 2; ++p) {
        if (n % p != 0) continue;
        for (size_t rot = 0; rot < p; ++rot) {
            bool periodic = true;
            for (size_t i = 0; i < n && periodic; ++i)
                periodic = (w[(rot + i) % n] == w[(rot + i + p) % n]);
            if (periodic) return true;
        }
    }
    return false;
}

// rewrite tables for the canonical form, built once per census
struct RelatorTable {
    Word relator;
    std::vector<Word> rotations;  // relator and inverse, all cyclic rotations

    explicit RelatorTable(const Word& rel)
        : relator(rel), rotations(detail::relator_rotations(rel)) {}

    // true if the last min(5, n) letters of w end in a forbidden >= 5 piece
    bool tail_has_long_piece(const Word& w) const {
        if (w.size() < 5) return false;
        size_t i0 = w.size() - 5;
        for (const auto& r : rotations) {
            bool match = true;
            for (size_t j = 0; j < 5 && match; ++j) match = (w[i0 + j] == r[j]);
            if (match) return true;
        }
        return false;
    }
};

namespace detail {

inline Word rot_inv_min(const Word& v) {
    Word best = v;
    Word inv = invert_word(v);
    for (size_t k = 0; k < v.size(); ++k) {
        best = std::min(best, rotate_word(v, k));
        best = std::min(best, rotate_word(inv, k));
    }
    return best;
}

// one Dehn shortening step: returns true and overwrites w if a piece of
// length >= 5 (cyclically) was swapped for its shorter complement
inline bool shorten_once(Word& w, const RelatorTable& tab) {
    size_t R = tab.relator.size();
    for (size_t p = R - 1; p >= 5; --p) {
        if (p > w.size()) continue;
        for (size_t i = 0; i < w.size(); ++i) {
            for (const auto& r : tab.rotations) {
                Word next;
                if (apply_piece_swap(w, i, r, p, next)) {
                    w = std::move(next);
                    return true;
                }
            }
        }
    }
    return false;
}

}  // namespace detail

// Dehn-reduced conjugacy canonical form: shorten away all >= 5 relator
// pieces, then take the lexicographic minimum of the orbit under rotation,
// inversion and equal-length half-relator swaps.  If a swap chain uncovers a
// shorter spelling the whole reduction restarts from it.
inline Word canonical_word(const Word& w_in, const RelatorTable& tab,
                           bool* power_in_orbit = nullptr) {
    Word w = detail::cyclic_free_reduce(w_in);
    const size_t orbit_cap = 4096;
    if (power_in_orbit) *power_in_orbit = false;

    for (int restart = 0; restart < 64; ++restart) {
        while (w.size() >= 5 && detail::shorten_once(w, tab)) {
        }
        if (w.empty()) return w;

        std::vector<Word> frontier{detail::rot_inv_min(w)};
        std::map<Word, bool> seen{{frontier[0], true}};
        Word best = frontier[0];
        if (power_in_orbit) *power_in_orbit = is_proper_power(best);
        bool found_shorter = false;
        while (!frontier.empty() && seen.size() < orbit_cap && !found_shorter) {
            std::vector<Word> next_frontier;
            for (const auto& v : frontier) {
                for (size_t i = 0; i < v.size() && !found_shorter; ++i) {
                    for (const auto& r : tab.rotations) {
                        Word next;
                        if (!detail::apply_piece_swap(v, i, r, 4, next)) continue;
                        if (next.size() < v.size()) {
                            w = std::move(next);
                            found_shorter = true;
                            break;
                        }
                        Word c = detail::rot_inv_min(next);
                        if (!seen.count(c)) {
                            seen[c] = true;
                            best = std::min(best, c);
                            if (power_in_orbit && !*power_in_orbit)
                                *power_in_orbit = is_proper_power(c);
                            next_frontier.push_back(std::move(c));
                        }
                    }
                }
                if (found_shorter) break;
            }
            frontier = std::move(next_frontier);
        }
        if (!found_shorter) return best;
    }
    throw IterationCap("canonical form did not stabilize");
}

// axis frame of a hyperbolic matrix: columns are the expanding/contracting
// eigenvectors, scaled to det = 1, so that M S = S exp(l A)
inline GroupElement axis_frame_of(const GroupElement& m_in) {
    GroupElement m = m_in;
    if (m.trace() < 0) {
        m.a = -m.a;
        m.b = -m.b;
        m.c = -m.c;
        m.d = -m.d;
    }
    double tr = m.trace();
    if (tr <= 2.0) throw NotHyperbolic("trace " + fmt17(tr));
    double disc = std::sqrt(tr * tr - 4.0);
    double lp = 0.5 * (tr + disc), lm = 0.5 * (tr - disc);
    auto eigvec = [&m](double lam, double& x, double& y) {
        // columns of (M - other*I) span the eigenvector; pick the bigger one
        double c1x = m.a - lam, c1y = m.c;
        double c2x = m.b, c2y = m.d - lam;
        if (c1x * c1x + c1y * c1y >= c2x * c2x + c2y * c2y) {
            x = c1x;
            y = c1y;
        } else {
            x = c2x;
            y = c2y;
        }
        double n = std::hypot(x, y);
        x /= n;
        y /= n;
    };
    double px, py, qx, qy;
    eigvec(lm, px, py);  // (M - lm I) spans the lp eigenvector
    eigvec(lp, qx, qy);
    double det = px * qy - py * qx;
    if (det < 0) {
        qx = -qx;
        qy = -qy;
        det = -det;
    }
    double s = std::sqrt(det);
    return GroupElement{px / s, qx / s, py / s, qy / s, 0};
}

inline double closure_residual(const GeodesicRecord& rec) {
    GroupElement lhs = rec.matrix * rec.axis_frame;
    GroupElement rhs = rec.axis_frame * geodesic_translation(rec.length);
    return lhs.projective_distance(rhs);
}

// phase point on the axis; flowing by the record's length returns to it mod Gamma
inline PhasePoint axis_point(const SurfaceGroup& grp, const GeodesicRecord& rec, double t = 0.0) {
    return reduce(grp, PhasePoint::from_group(rec.axis_frame * geodesic_translation(t)));
}

struct CensusOptions {
    double max_length = 8.0;
    double ell_min_per_letter = 0.9;  // word-length bound = ceil(L / this)
    int max_word_cap = 14;
    int word_length_override = 0;     // > 0 forces the bound (stability gate)
    std::array<uint8_t, 8> letter_order{0, 1, 2, 3, 4, 5, 6, 7};
    bool merge_respellings = true;
    int conjugator_ball_length = 4;
};

namespace detail {

struct CensusBuilder {
    const SurfaceGroup& grp;
    const CensusOptions& opt;
    RelatorTable table;
    double L;
    int n_max;
    std::map<Word, GeodesicRecord> classes;
    Word word;
    std::vector<GroupElement> stack;  // partial products, stack[i] = prefix of length i

    CensusBuilder(const SurfaceGroup& g, const CensusOptions& o)
        : grp(g), opt(o), table(g.relation), L(o.max_length) {
        n_max = o.word_length_override > 0
                    ? o.word_length_override
                    : static_cast<int>(std::ceil(L / o.ell_min_per_letter));
        if (n_max > o.max_word_cap)
            throw BudgetExceeded("census word length bound " + std::to_string(n_max) +
                                 " exceeds cap " + std::to_string(opt.max_word_cap));
        stack.push_back(GroupElement::identity());
    }

    void visit() {
        if (word.front() != inverse_letter(word.back())) {
            const GroupElement& m = stack.back();
            double tr = std::abs(m.trace());
            if (tr > 2.0 + 1e-12) {
                double len = 2.0 * std::acosh(0.5 * tr);
                if (len <= L + 1e-12) record();
            }
        }
    }

    void record() {
        bool power = false;
        Word canon = canonical_word(word, table, &power);
        if (canon.empty() || classes.count(canon)) return;
        GeodesicRecord rec;
        rec.word = canon;
        rec.matrix = grp.word_element(canon);
        rec.matrix.normalize();
        rec.trace = std::abs(rec.matrix.trace());
        if (rec.trace <= 2.0 + 1e-12) return;
        rec.length = 2.0 * std::acosh(0.5 * rec.trace);
        if (rec.length > L + 1e-12) return;  // shortened spellings re-enter below the cut
        rec.primitive = !power;
        rec.axis_frame = axis_frame_of(rec.matrix);
        classes.emplace(std::move(canon), std::move(rec));
    }

    void dfs(int depth) {
        if (depth >= n_max) return;
        uint8_t last = word.empty() ? 255 : word.back();
        for (uint8_t l : opt.letter_order) {
            if (!word.empty() && l == inverse_letter(last)) continue;
            word.push_back(l);
            // a >= 5 relator piece can never be part of a geodesic spelling;
            // pruning here loses no class
            if (table.tail_has_long_piece(word)) {
                word.pop_back();
                continue;
            }
            stack.push_back(stack[stack.size() - 1] * grp.pairing[l]);
            visit();
            dfs(depth + 1);
            word.pop_back();
            stack.pop_back();
        }
    }
};

inline std::vector<GroupElement> conjugator_ball(const SurfaceGroup& grp, int max_len) {
    std::vector<GroupElement> ball{GroupElement::identity()};
    std::vector<Word> frontier{{}};
    for (int n = 0; n < max_len; ++n) {
        std::vector<Word> next;
        for (const auto& w : frontier) {
            for (uint8_t l = 0; l < 8; ++l) {
                if (!w.empty() && l == inverse_letter(w.back())) continue;
                Word e = w;
                e.push_back(l);
                ball.push_back(grp.word_element(e));
                next.push_back(std::move(e));
            }
        }
        frontier = std::move(next);
    }
    return ball;
}

inline bool conjugate_certificate(const std::vector<GroupElement>& ball, const GroupElement& m1,
                                  const GroupElement& m2, double tol = 1e-8) {
    for (const auto& g : ball) {
        GroupElement c = g * m1 * g.inverse();
        if (c.projective_distance(m2) < tol) return true;
    }
    return false;
}

}  // namespace detail

inline std::vector<GeodesicRecord> enumerate_geodesics(const SurfaceGroup& grp,
                                                       const CensusOptions& opt = {}) {
    if (opt.max_length <= 0) throw ConfigError("census max_length must be positive");
    detail::CensusBuilder builder(grp, opt);
    builder.dfs(0);

    std::vector<GeodesicRecord> out;
    out.reserve(builder.classes.size());
    for (auto& kv : builder.classes) out.push_back(std::move(kv.second));
    std::sort(out.begin(), out.end(), [](const GeodesicRecord& a, const GeodesicRecord& b) {
        return a.length != b.length ? a.length < b.length : a.word < b.word;
    });

    // trace clustering safety net: merge only with a conjugacy certificate
    std::vector<GroupElement> ball;
    std::vector<GeodesicRecord> kept;
    for (auto& rec : out) {
        bool merged = false;
        for (auto& prev : kept) {
            if (std::abs(prev.trace - rec.trace) > 1e-9) continue;
            if (opt.merge_respellings) {
                if (ball.empty()) ball = detail::conjugator_ball(grp, opt.conjugator_ball_length);
                if (detail::conjugate_certificate(ball, rec.matrix, prev.matrix)) {
                    prev.merged_respelling = true;
                    merged = true;
                    break;
                }
            }
            prev.ambiguous_cluster = rec.ambiguous_cluster = true;
        }
        if (!merged) kept.push_back(std::move(rec));
    }
    return kept;
}

inline size_t counting_function(const std::vector<GeodesicRecord>& census, double L) {
    size_t n = 0;
    for (const auto& r : census)
        if (r.length <= L) ++n;
    return n;
}

inline std::string census_csv(const std::vector<GeodesicRecord>& census) {
    std::string s = "word,trace,length,primitive\n";
    for (const auto& r : census) {
        s += word_string(r.word) + "," + fmt17(r.trace) + "," + fmt17(r.length) + "," +
             (r.primitive ? "1" : "0") + "\n";
    }
    return s;
}

}  // namespace bolza
