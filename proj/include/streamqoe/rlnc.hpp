#pragma once

// Random linear network coding over GF(2^k), k in {1, 4, 8}.
//
// Arithmetic is table driven: addition is XOR, multiplication goes through
// log/antilog tables built from a primitive element at construction (the
// antilog table is doubled so products skip the mod q-1 reduction). The
// decoder keeps its coefficient rows in reduced row-echelon form, so rank
// growth is detected per ingested packet and a full-rank state decodes by
// reading the payload rows straight out.
//
// The point of the module is the modeling assumption of the buffering
// analysis: a received coded packet is innovative with probability
// 1 - q^{rank - W}, so the long-run redundant fraction delta(q) vanishes as
// the field grows and the useful rate approaches the raw packet rate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace streamqoe {

class GaloisField {
public:
    explicit GaloisField(unsigned bits) : bits_(bits), size_(1u << bits) {
        unsigned poly, gen;
        switch (bits) {
            case 1: poly = 0x3, gen = 1; break;   // x + 1
            case 4: poly = 0x13, gen = 2; break;  // x^4 + x + 1
            case 8: poly = 0x11b, gen = 3; break; // x^8 + x^4 + x^3 + x + 1
            default:
                throw std::invalid_argument("GaloisField: bits must be 1, 4 or 8");
        }
        log_.assign(size_, 0);
        exp_.assign(2 * (size_ - 1) + 1, 1);
        unsigned x = 1;
        for (unsigned i = 0; i + 1 < size_; ++i) {
            exp_[i] = static_cast<std::uint8_t>(x);
            log_[x] = static_cast<std::uint8_t>(i);
            x = shift_mul(x, gen, poly, bits);
        }
        for (unsigned i = size_ - 1; i < exp_.size(); ++i)
            exp_[i] = exp_[i - (size_ - 1)];
    }

    static GaloisField from_order(unsigned q) {
        switch (q) {
            case 2: return GaloisField(1);
            case 16: return GaloisField(4);
            case 256: return GaloisField(8);
            default:
                throw std::invalid_argument("GaloisField: order must be 2, 16 or 256");
        }
    }

    unsigned bits() const { return bits_; }
    unsigned order() const { return size_; }

    std::uint8_t add(std::uint8_t a, std::uint8_t b) const { return a ^ b; }

    std::uint8_t mul(std::uint8_t a, std::uint8_t b) const {
        if (a == 0 || b == 0) return 0;
        return exp_[log_[a] + log_[b]];
    }

    std::uint8_t inv(std::uint8_t a) const {
        if (a == 0) throw std::domain_error("GaloisField: zero has no inverse");
        return exp_[size_ - 1 - log_[a]];
    }

    std::uint8_t div(std::uint8_t a, std::uint8_t b) const { return mul(a, inv(b)); }

private:
    // shift-and-xor product, used only while building the tables
    static unsigned shift_mul(unsigned a, unsigned b, unsigned poly, unsigned bits) {
        unsigned acc = 0;
        while (b) {
            if (b & 1) acc ^= a;
            b >>= 1;
            a <<= 1;
            if (a & (1u << bits)) a ^= poly;
        }
        return acc;
    }

    unsigned bits_;
    unsigned size_;
    std::vector<std::uint8_t> log_;
    std::vector<std::uint8_t> exp_;
};

struct CodedPacket {
    unsigned block_id = 0;
    std::vector<std::uint8_t> coeffs;  // one per source packet of the block
    std::vector<std::uint8_t> payload; // symbol-wise combination
};

// Random combination of a block's source packets. Coefficients are uniform
// over the whole field, zero vector included; an all-zero draw is simply a
// non-innovative packet.
inline CodedPacket encode(const GaloisField& field, unsigned block_id,
                          const std::vector<std::vector<std::uint8_t>>& source,
                          PathRng& rng) {
    if (source.empty()) throw std::invalid_argument("encode: empty block");
    const std::size_t len = source.front().size();
    for (const auto& pkt : source) {
        if (pkt.size() != len)
            throw std::invalid_argument("encode: ragged packet lengths");
        for (std::uint8_t sym : pkt)
            if (sym >= field.order())
                throw std::invalid_argument("encode: symbol outside field");
    }

    CodedPacket out;
    out.block_id = block_id;
    out.coeffs.resize(source.size());
    out.payload.assign(len, 0);
    for (std::size_t i = 0; i < source.size(); ++i) {
        const auto c = static_cast<std::uint8_t>(rng.uniform_bits(field.bits()));
        out.coeffs[i] = c;
        if (c == 0) continue;
        for (std::size_t s = 0; s < len; ++s)
            out.payload[s] ^= field.mul(c, source[i][s]);
    }
    return out;
}

// Rank-tracking decoder for one block; rows are kept in reduced row-echelon
// form with payloads carried along, so decode() is a read-out at full rank.
class BlockDecoder {
public:
    enum class Ingest { Innovative, Redundant };

    BlockDecoder(const GaloisField& field, unsigned block_id, unsigned block_size)
        : field_(&field), block_id_(block_id), block_size_(block_size) {
        if (block_size == 0)
            throw std::invalid_argument("BlockDecoder: block_size == 0");
        rows_.reserve(block_size);
    }

    unsigned block_id() const { return block_id_; }
    unsigned block_size() const { return block_size_; }
    unsigned rank() const { return static_cast<unsigned>(rows_.size()); }
    bool decodable() const { return rank() == block_size_; }

    Ingest ingest(const CodedPacket& pkt) {
        if (pkt.block_id != block_id_)
            throw std::invalid_argument("BlockDecoder: block_id mismatch");
        return reduce(pkt.coeffs, pkt.payload);
    }

    // coefficient-only ingestion (rank statistics without payload work)
    Ingest ingest_coefficients(const std::vector<std::uint8_t>& coeffs) {
        return reduce(coeffs, {});
    }

    std::vector<std::vector<std::uint8_t>> decode() const {
        if (!decodable())
            throw std::logic_error("BlockDecoder: rank below block size, not decodable");
        std::vector<std::vector<std::uint8_t>> out;
        out.reserve(rows_.size());
        for (const auto& row : rows_) out.push_back(row.payload);
        return out;
    }

private:
    struct Row {
        unsigned pivot;
        std::vector<std::uint8_t> coeffs;
        std::vector<std::uint8_t> payload;
    };

    Ingest reduce(std::vector<std::uint8_t> c, std::vector<std::uint8_t> p) {
        if (c.size() != block_size_)
            throw std::invalid_argument("BlockDecoder: coefficient count mismatch");
        if (!rows_.empty() && p.size() != rows_.front().payload.size())
            throw std::invalid_argument("BlockDecoder: payload length mismatch");

        const GaloisField& f = *field_;
        for (const Row& row : rows_) {
            const std::uint8_t factor = c[row.pivot];
            if (factor == 0) continue;
            for (std::size_t j = row.pivot; j < c.size(); ++j)
                c[j] ^= f.mul(factor, row.coeffs[j]);
            for (std::size_t j = 0; j < p.size(); ++j)
                p[j] ^= f.mul(factor, row.payload[j]);
        }

        unsigned pivot = block_size_;
        for (unsigned j = 0; j < block_size_; ++j)
            if (c[j] != 0) { pivot = j; break; }
        if (pivot == block_size_) return Ingest::Redundant;

        const std::uint8_t scale = f.inv(c[pivot]);
        for (std::size_t j = pivot; j < c.size(); ++j) c[j] = f.mul(scale, c[j]);
        for (auto& sym : p) sym = f.mul(scale, sym);

        for (Row& row : rows_) { // keep earlier rows reduced against the new pivot
            const std::uint8_t factor = row.coeffs[pivot];
            if (factor == 0) continue;
            for (std::size_t j = pivot; j < c.size(); ++j)
                row.coeffs[j] ^= f.mul(factor, c[j]);
            for (std::size_t j = 0; j < p.size(); ++j)
                row.payload[j] ^= f.mul(factor, p[j]);
        }

        Row fresh{pivot, std::move(c), std::move(p)};
        const auto at = std::upper_bound(
            rows_.begin(), rows_.end(), pivot,
            [](unsigned v, const Row& r) { return v < r.pivot; });
        rows_.insert(at, std::move(fresh));
        return Ingest::Innovative;
    }

    const GaloisField* field_;
    unsigned block_id_;
    unsigned block_size_;
    std::vector<Row> rows_;
};

struct RankProfile {
    unsigned rank = 0;          // decoder rank when the packet arrived
    std::uint64_t ingested = 0;
    std::uint64_t redundant = 0;
    double theory = 0.0;        // q^{rank - W}
};

struct DeltaReport {
    unsigned field_order = 0;
    unsigned block_size = 0;
    std::uint64_t trials = 0;
    std::uint64_t packets = 0;
    std::uint64_t redundant = 0;
    double delta_hat = 0.0;   // long-run redundant fraction
    double half_width = 0.0;  // CI on delta_hat
    double confidence = 0.0;
    double theory = 0.0;      // exact series value S/(W+S)
    std::vector<RankProfile> per_rank;
};

// Expected redundant packets per block fill: at rank j an incoming uniform
// combination falls in the current row space with probability q^{j-W}, so
// the redundant count at rank j is geometric with that failure probability.
inline double expected_redundant_per_block(unsigned q, unsigned block_size) {
    double sum = 0.0;
    for (unsigned j = 0; j < block_size; ++j) {
        const double miss = std::pow(static_cast<double>(q),
                                     static_cast<double>(j) -
                                         static_cast<double>(block_size));
        sum += miss / (1.0 - miss);
    }
    return sum;
}

inline double delta_theory(unsigned q, unsigned block_size) {
    const double s = expected_redundant_per_block(q, block_size);
    return s / (static_cast<double>(block_size) + s);
}

// Fill `trials` fresh decoders with uniform random combinations and measure
// the fraction of received packets that did not raise the rank.
inline DeltaReport estimate_delta(unsigned q, unsigned block_size,
                                  std::uint64_t trials, std::uint64_t seed,
                                  double confidence = 0.99) {
    if (trials < 10000)
        throw std::invalid_argument("estimate_delta: need trials >= 10^4");
    const GaloisField field = GaloisField::from_order(q);
    if (block_size == 0) throw std::invalid_argument("estimate_delta: block_size == 0");

    struct Acc {
        std::uint64_t packets = 0;
        double red_sum = 0.0;    // per-block redundant counts, for the CI
        double red_sum_sq = 0.0;
        std::vector<std::uint64_t> rank_ingested, rank_redundant;
        void combine(const Acc& o) {
            packets += o.packets;
            red_sum += o.red_sum;
            red_sum_sq += o.red_sum_sq;
            if (rank_ingested.size() < o.rank_ingested.size()) {
                rank_ingested.resize(o.rank_ingested.size(), 0);
                rank_redundant.resize(o.rank_redundant.size(), 0);
            }
            for (std::size_t i = 0; i < o.rank_ingested.size(); ++i) {
                rank_ingested[i] += o.rank_ingested[i];
                rank_redundant[i] += o.rank_redundant[i];
            }
        }
    };

    auto acc = detail::chunked_reduce<Acc>(
        trials, 256, [&](std::uint64_t lo, std::uint64_t hi, Acc& a) {
            a.rank_ingested.assign(block_size, 0);
            a.rank_redundant.assign(block_size, 0);
            std::vector<std::uint8_t> coeffs(block_size);
            for (std::uint64_t t = lo; t < hi; ++t) {
                PathRng rng(seed, t);
                BlockDecoder dec(field, 0, block_size);
                std::uint64_t redundant = 0;
                while (!dec.decodable()) {
                    for (auto& c : coeffs)
                        c = static_cast<std::uint8_t>(rng.uniform_bits(field.bits()));
                    const unsigned rank_before = dec.rank();
                    ++a.rank_ingested[rank_before];
                    ++a.packets;
                    if (dec.ingest_coefficients(coeffs) ==
                        BlockDecoder::Ingest::Redundant) {
                        ++a.rank_redundant[rank_before];
                        ++redundant;
                    }
                }
                a.red_sum += static_cast<double>(redundant);
                a.red_sum_sq +=
                    static_cast<double>(redundant) * static_cast<double>(redundant);
            }
        });

    DeltaReport rep;
    rep.field_order = q;
    rep.block_size = block_size;
    rep.trials = trials;
    rep.packets = acc.packets;
    rep.redundant = acc.packets - trials * block_size;
    rep.delta_hat =
        static_cast<double>(rep.redundant) / static_cast<double>(rep.packets);
    rep.confidence = confidence;
    rep.theory = delta_theory(q, block_size);

    // CI on the mean redundant count per block, pushed through
    // delta = X / (X + W) by the delta method.
    const EstimateWithCI red_mean =
        mean_estimate(acc.red_sum, acc.red_sum_sq, trials, confidence);
    const double denom = red_mean.point + static_cast<double>(block_size);
    rep.half_width =
        red_mean.half_width * static_cast<double>(block_size) / (denom * denom);

    rep.per_rank.resize(block_size);
    for (unsigned j = 0; j < block_size; ++j) {
        rep.per_rank[j].rank = j;
        rep.per_rank[j].ingested = acc.rank_ingested[j];
        rep.per_rank[j].redundant = acc.rank_redundant[j];
        rep.per_rank[j].theory =
            std::pow(static_cast<double>(q),
                     static_cast<double>(j) - static_cast<double>(block_size));
    }
    return rep;
}

} // namespace streamqoe
