#!/usr/bin/env python3
"""Writes the synthetic mini dataset used by the golden and determinism tests.

Layout under OUT (default tests/data/mini):
  raw/idmapping_selected.tab       UniProt id mapping, 22 columns
  raw/assembly_summary_refseq.txt  NCBI assembly summaries
  raw/assembly_summary_genbank.txt
  raw/gff/                         annotation and protein files per assembly
  raw/rankedlineage.dmp            NCBI ranked lineage dump
  targets.txt                      50 targets in mixed id standards
  annotations/*.tsv                user annotation files
  expected.json                    facts fixed by construction

Output is byte-stable for a given seed.
"""

import argparse
import gzip
import io
import json
import os
import random

AMINO = "ACDEFGHIKLMNPQRSTVWY"
N_FAMILIES = 30


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(text)


def write_gz(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    buf = io.BytesIO()
    with gzip.GzipFile(filename="", mode="wb", fileobj=buf, mtime=0) as g:
        g.write(text.encode())
    with open(path, "wb") as f:
        f.write(buf.getvalue())


class Builder:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        self.templates = [self.random_seq(self.rng.randint(120, 360)) for _ in range(N_FAMILIES)]
        self.next_wp = 100000001
        self.next_mbx = 1000001
        self.next_embl = 10001
        self.sequences = {}

    def random_seq(self, n):
        return "M" + "".join(self.rng.choice(AMINO) for _ in range(n - 1))

    def mutate(self, seq, rate=0.08):
        out = [seq[0]]
        for c in seq[1:]:
            out.append(self.rng.choice(AMINO) if self.rng.random() < rate else c)
        return "".join(out)

    def member(self, family):
        if family is None:
            return self.random_seq(self.rng.randint(80, 300))
        return self.mutate(self.templates[family])

    def code(self, refseq):
        if refseq:
            c = "WP_%09d.1" % self.next_wp
            self.next_wp += 1
        else:
            c = "MBX%07d.1" % self.next_mbx
            self.next_mbx += 1
        return c

    def embl_code(self):
        c = "KXA%05d.1" % self.next_embl
        self.next_embl += 1
        return c


# Operon patterns as ordered family lists; 'None' marks an orphan slot.
OPERONS = [
    [0, 1, 2, 3, 4, 5, 6, 7, 8],
    [9, 10, 11, 12, 13, 14, 15, 16, 17],
    [18, 19, 20, 21, 22, 23, 24, 25, 26],
]

TAXA = [
    # taxid, name, species, genus, family, order, class, phylum, kingdom, superkingdom
    (562, "Escherichia coli", "", "Escherichia", "Enterobacteriaceae", "Enterobacterales",
     "Gammaproteobacteria", "Pseudomonadota", "", "Bacteria"),
    (83333, "Escherichia coli K-12", "Escherichia coli", "Escherichia", "Enterobacteriaceae",
     "Enterobacterales", "Gammaproteobacteria", "Pseudomonadota", "", "Bacteria"),
    (590, "Salmonella enterica", "", "Salmonella", "Enterobacteriaceae", "Enterobacterales",
     "Gammaproteobacteria", "Pseudomonadota", "", "Bacteria"),
    (287, "Pseudomonas aeruginosa", "", "Pseudomonas", "Pseudomonadaceae", "Pseudomonadales",
     "Gammaproteobacteria", "Pseudomonadota", "", "Bacteria"),
    (1423, "Bacillus subtilis", "", "Bacillus", "Bacillaceae", "Bacillales", "Bacilli",
     "Bacillota", "", "Bacteria"),
    (1280, "Staphylococcus aureus", "", "Staphylococcus", "Staphylococcaceae", "Bacillales",
     "Bacilli", "Bacillota", "", "Bacteria"),
    (1773, "Mycobacterium tuberculosis", "", "Mycobacterium", "Mycobacteriaceae",
     "Mycobacteriales", "Actinomycetes", "Actinomycetota", "", "Bacteria"),
    (2287, "Saccharolobus solfataricus", "", "Saccharolobus", "Sulfolobaceae", "Sulfolobales",
     "Thermoprotei", "Thermoproteota", "", "Archaea"),
    (2190, "Methanocaldococcus jannaschii", "", "Methanocaldococcus", "Methanocaldococcaceae",
     "Methanococcales", "Methanococci", "Methanobacteriota", "", "Archaea"),
    # Candidate lineage without phylum or class.
    (1891238, "Candidatus Synthetica minima", "", "Synthetica", "", "", "", "", "", "Bacteria"),
]
UNKNOWN_TAXID = 999999
EXTRA_TAXA = [
    (9606, "Homo sapiens", "", "Homo", "Hominidae", "Primates", "Mammalia", "Chordata",
     "Metazoa", "Eukaryota"),
    (4932, "Saccharomyces cerevisiae", "", "Saccharomyces", "Saccharomycetaceae",
     "Saccharomycetales", "Saccharomycetes", "Ascomycota", "Fungi", "Eukaryota"),
]


def build(out, seed):
    b = Builder(seed)
    rng = b.rng
    raw = os.path.join(out, "raw")
    gff_dir = os.path.join(raw, "gff")

    assemblies = []
    for i in range(20):
        refseq = i < 16
        prefix = "GCF" if refseq else "GCA"
        acc = "%s_%09d.1" % (prefix, 900000001 + i * 7)
        taxid = TAXA[i % len(TAXA)][0]
        if i == 13:
            taxid = UNKNOWN_TAXID
        name = "Synthetic strain %02d" % i
        assemblies.append({"acc": acc, "refseq": refseq, "taxid": taxid, "name": name,
                           "asm_name": "ASM%05dv1" % (i + 1), "contigs": []})

    # Genes per assembly: one or two contigs; each carries an operon
    # instance somewhere plus orphan and filler-family genes.
    shared_wp = None
    for i, a in enumerate(assemblies):
        n_contigs = 2 if i % 3 == 0 else 1
        for c in range(n_contigs):
            contig = "NZ_SYN%02d%02d.1" % (i, c + 1) if a["refseq"] else "JASY%02d%02d.1" % (i, c + 1)
            genes = []
            if c == 0:
                pattern = list(OPERONS[i % 3])
                if i % 4 == 1:
                    pattern[rng.randrange(1, 8)] = None  # one broken slot
                if i % 5 == 2:
                    pattern = pattern[:-1]
                n_before = 0 if i in (2, 7) else rng.randint(1, 3)  # 2, 7: operon at contig start
                n_after = 0 if i in (4, 11) else rng.randint(1, 3)  # 4, 11: operon at contig end
                slots = [rng.choice([None, 27, 28, 29]) for _ in range(n_before)]
                op_start = len(slots)
                slots += pattern
                slots += [rng.choice([None, 27, 28, 29]) for _ in range(n_after)]
                minus = i % 2 == 1
            else:
                slots = [rng.choice([None, 27, 28, 29]) for _ in range(5)]
                op_start = None
                minus = False
            pos = rng.randint(100, 900)
            for k, fam in enumerate(slots):
                seq = b.member(fam)
                if a["refseq"] or k % 3:
                    code = b.code(a["refseq"])
                else:
                    code = b.embl_code()
                length = 3 * len(seq) + 3
                genes.append({"code": code, "family": fam, "seq": seq, "start": pos,
                              "end": pos + length - 1, "strand": "-" if minus else "+",
                              "product": "synthetic protein family %d" % fam if fam is not None
                              else "hypothetical protein",
                              "op_index": (k - op_start) if op_start is not None and
                              op_start <= k < op_start + len(pattern) else None})
                pos += length + rng.randint(15, 220)
            if minus:
                # Minus-strand operon: biological order runs right to left.
                coords = [(g["start"], g["end"]) for g in genes]
                coords.reverse()
                for g, (s, e) in zip(genes, coords):
                    g["start"], g["end"] = s, e
                genes.sort(key=lambda g: g["start"])
            a["contigs"].append({"name": contig, "genes": genes})

    # A multispecies WP_ protein present in two RefSeq assemblies and one
    # GenBank assembly with a smaller accession number.
    shared = assemblies[12]["contigs"][0]["genes"][0]
    shared_wp = shared["code"]
    for idx in (3, 18):
        g = dict(assemblies[idx]["contigs"][-1]["genes"][-1])
        g.update(code=shared_wp, seq=shared["seq"], family=shared["family"], product=shared["product"],
                 op_index=None, start=g["end"] + 300, end=g["end"] + 300 + 3 * len(shared["seq"]) + 2,
                 strand="+")
        assemblies[idx]["contigs"][-1]["genes"].append(g)

    for a in assemblies:
        for contig in a["contigs"]:
            for g in contig["genes"]:
                b.sequences.setdefault(g["code"], g["seq"])

    # ---- targets
    targets = []  # (gene, assembly index)
    for i, a in enumerate(assemblies):
        genes = a["contigs"][0]["genes"]
        centre = [g for g in genes if g["op_index"] == 4]
        if centre:
            targets.append((centre[0], i))
    for i, a in enumerate(assemblies):
        genes = a["contigs"][0]["genes"]
        if i in (2, 7):
            targets.append((genes[0], i))
        elif i in (4, 11):
            targets.append((genes[-1], i))
        else:
            targets.append((genes[rng.randrange(len(genes))], i))
    for i in (0, 3, 6, 9, 12, 15, 18):
        genes = assemblies[i]["contigs"][-1]["genes"]
        targets.append((genes[rng.randrange(len(genes))], i))
    for i in (5, 8):
        targets.append((assemblies[i]["contigs"][0]["genes"][1], i))
    targets.append((shared, 12))
    seen = set()
    uniq = []
    for g, i in targets:
        if g["code"] not in seen:
            seen.add(g["code"])
            uniq.append((g, i))
    while len(uniq) < 50:
        i = rng.randrange(20)
        genes = [g for c in assemblies[i]["contigs"] for g in c["genes"]]
        g = genes[rng.randrange(len(genes))]
        if g["code"] not in seen:
            seen.add(g["code"])
            uniq.append((g, i))
    uniq = uniq[:50]

    # Pick the identifier standard each target is written in.
    idmap_rows = []
    target_ids = []
    rng2 = random.Random(seed + 1)

    def uniprot_ac(n):
        return "%s%d%s%d" % (rng2.choice("OPQ"), rng2.randint(0, 9),
                             "".join(rng2.choice("ABCDEFGHJKLMNPQRSTUVWXYZ0123456789") for _ in range(3)),
                             rng2.randint(0, 9))

    def mnemonic():
        return "".join(rng2.choice("ABCDEFGHIKLMNPRSTVWY") for _ in range(4)) + "_" + \
               "".join(rng2.choice("ABCDEFGHIKLMNPRSTVWY") for _ in range(5))

    used_acs = set()
    plan = []
    for n, (g, i) in enumerate(uniq):
        code = g["code"]
        if code.startswith("WP_"):
            kind = ["RefSeq", "UniProtKB-AC", "UniProtKB-ID", "GeneID", "UniParc", "EMBL-CDS"][n % 6]
        elif code.startswith("MBX"):
            kind = "GenBank"
        else:
            kind = "EMBL-CDS-self"
        plan.append((g, i, kind))

    for g, i, kind in plan:
        code = g["code"]
        ac = uniprot_ac(0)
        while ac in used_acs:
            ac = uniprot_ac(0)
        used_acs.add(ac)
        row = [""] * 22
        row[0] = ac
        row[1] = mnemonic()
        row[2] = str(rng2.randint(1000000, 99999999))
        row[10] = "UPI%010X" % rng2.randint(0, 0xFFFFFFFFFF)
        row[12] = str(assemblies[i]["taxid"])
        if kind == "EMBL-CDS-self":
            row[17] = code
        else:
            embl = "KXB%05d.1" % rng2.randint(10000, 99999)
            row[17] = embl
            row[3] = code if kind != "GenBank" else ""
            # A second RefSeq value after the canonical one exercises the
            # multi-valued field rule.
            if kind == "UniProtKB-AC" and rng2.random() < 0.5:
                row[3] = code + "; WP_%09d.1" % rng2.randint(800000000, 899999999)
        idmap_rows.append(row)
        tid = {"RefSeq": code, "GenBank": code, "EMBL-CDS-self": code, "UniProtKB-AC": row[0],
               "UniProtKB-ID": row[1], "GeneID": row[2], "UniParc": row[10], "EMBL-CDS": row[17]}[kind]
        target_ids.append(tid)
    # Noise rows for proteins that are never targeted.
    for _ in range(120):
        row = [""] * 22
        row[0] = uniprot_ac(0)
        row[1] = mnemonic()
        if rng2.random() < 0.7:
            row[3] = "WP_%09d.1" % rng2.randint(700000000, 799999999)
        row[10] = "UPI%010X" % rng2.randint(0, 0xFFFFFFFFFF)
        idmap_rows.append(row)
    rng2.shuffle(idmap_rows)
    write(os.path.join(raw, "idmapping_selected.tab"), "".join("\t".join(r) + "\n" for r in idmap_rows))

    # ---- assembly summaries
    header = ("#   See ftp://ftp.ncbi.nlm.nih.gov/genomes/README_assembly_summary.txt for a description of the columns.\n"
              "#assembly_accession\tbioproject\tbiosample\twgs_master\trefseq_category\ttaxid\tspecies_taxid\t"
              "organism_name\tinfraspecific_name\tisolate\tversion_status\tassembly_level\trelease_type\t"
              "genome_rep\tseq_rel_date\tasm_name\tsubmitter\tgbrs_paired_asm\tpaired_asm_comp\tftp_path\t"
              "excluded_from_refseq\trelation_to_type_material\n")
    summaries = {True: header, False: header}
    for a in assemblies:
        base = "%s_%s" % (a["acc"], a["asm_name"])
        ftp = "https://ftp.ncbi.nlm.nih.gov/genomes/all/%s/%s" % ("GCF" if a["refseq"] else "GCA", base)
        cols = [a["acc"], "PRJNA000000", "SAMN00000000", "", "na", str(a["taxid"]), str(a["taxid"]), a["name"],
                "strain=%s" % a["asm_name"], "", "latest", "Complete Genome", "Major", "Full", "2020/01/01",
                a["asm_name"], "synthetic", "na", "na", ftp, "", ""]
        summaries[a["refseq"]] += "\t".join(cols) + "\n"
        a["base"] = base
    write(os.path.join(raw, "assembly_summary_refseq.txt"), summaries[True])
    write(os.path.join(raw, "assembly_summary_genbank.txt"), summaries[False])

    # ---- GFF and protein files
    missing_gff = assemblies[9]["acc"]
    for n, a in enumerate(assemblies):
        lines = ["##gff-version 3\n"]
        for contig in a["contigs"]:
            end = max(g["end"] for g in contig["genes"]) + 500
            lines.append("##sequence-region %s 1 %d\n" % (contig["name"], end))
        lines.append("#!genome-build %s\n" % a["asm_name"])
        for contig in a["contigs"]:
            end = max(g["end"] for g in contig["genes"]) + 500
            lines.append("%s\tRefSeq\tregion\t1\t%d\t.\t+\t.\tID=%s:1..%d;Dbxref=taxon:%d\n"
                         % (contig["name"], end, contig["name"], end, a["taxid"]))
            for k, g in enumerate(contig["genes"]):
                gid = "gene-SYN%02d_%04d" % (n, k)
                lines.append("%s\tRefSeq\tgene\t%d\t%d\t.\t%s\t.\tID=%s;Name=SYN%02d_%04d;gene_biotype=protein_coding\n"
                             % (contig["name"], g["start"], g["end"], g["strand"], gid, n, k))
                product = g["product"].replace(" ", "%20") if k % 4 == 0 else g["product"]
                attrs = "ID=cds-%s;Parent=%s;Dbxref=NCBI_GP:%s;Name=%s;gbkey=CDS;product=%s;protein_id=%s;transl_table=11" % (
                    g["code"], gid, g["code"], g["code"], product, g["code"])
                if k == 2 and n % 5 == 0:
                    # Programmed frameshift: two CDS segments, merged by the parser.
                    mid = g["start"] + (g["end"] - g["start"]) // 2
                    lines.append("%s\tProtein Homology\tCDS\t%d\t%d\t.\t%s\t0\t%s\n"
                                 % (contig["name"], g["start"], mid, g["strand"], attrs))
                    lines.append("%s\tProtein Homology\tCDS\t%d\t%d\t.\t%s\t2\t%s\n"
                                 % (contig["name"], mid - 1, g["end"], g["strand"], attrs))
                else:
                    lines.append("%s\tProtein Homology\tCDS\t%d\t%d\t.\t%s\t0\t%s\n"
                                 % (contig["name"], g["start"], g["end"], g["strand"], attrs))
        if n == 6:
            lines.append("##FASTA\n>%s\nACGTACGTACGT\n" % a["contigs"][0]["name"])
        text = "".join(lines)
        faa = "".join(">%s %s\n%s\n" % (g["code"], g["product"],
                                        "\n".join(g["seq"][p:p + 60] for p in range(0, len(g["seq"]), 60)))
                      for c in a["contigs"] for g in c["genes"])
        if a["acc"] != missing_gff:
            name = os.path.join(gff_dir, a["base"] + "_genomic.gff")
            if n % 2 == 0:
                write_gz(name + ".gz", text)
            else:
                write(name, text)
        pname = os.path.join(gff_dir, a["base"] + "_protein.faa")
        if n % 3 == 0:
            write_gz(pname + ".gz", faa)
        else:
            write(pname, faa)

    # ---- taxonomy
    with_rows = []
    for t in TAXA + EXTRA_TAXA:
        with_rows.append("\t|\t".join(str(x) for x in t) + "\t|\n")
    write(os.path.join(raw, "rankedlineage.dmp"), "".join(with_rows))

    # ---- targets file
    tlines = ["# mini dataset targets, mixed id standards\n"]
    for n, tid in enumerate(target_ids):
        tlines.append(tid + "\n")
        if n == 10:
            tlines.append("\n# a duplicate follows\n" + target_ids[3] + "\n")
    write(os.path.join(out, "targets.txt"), "".join(tlines))

    # ---- annotation files
    in_families = [g for g, _, _ in plan if g["family"] is not None]
    pdb = ["# code\tpdb\n"]
    for k, g in enumerate(in_families[:8]):
        pdb.append("%s\t%d%s\n" % (g["code"], 1 + k, "".join(rng.choice("ABCDEFGHIJKLMNOPQRSTUVWXYZ") for _ in range(3))))
    pdb.append("WP_999999999.1\t9ZZZ\n")
    pdb.append("malformed row without payload\n")
    func = ["%s\tsynthetic function %d\n" % (g["code"], g["family"]) for g in in_families[8:16]]
    tm = ["%s\t%d-%d\n" % (g["code"], 10 + k, 30 + k) for k, g in enumerate(in_families[16:22])]
    sp = ["%s\t1-%d\n" % (g["code"], 20 + k) for k, g in enumerate(in_families[22:26])]
    write(os.path.join(out, "annotations", "pdb.tsv"), "".join(pdb))
    write(os.path.join(out, "annotations", "function.tsv"), "".join(func))
    write(os.path.join(out, "annotations", "tm_segments.tsv"), "".join(tm))
    write(os.path.join(out, "annotations", "signal_peptide.tsv"), "".join(sp))

    expected = {
        "targets": len(target_ids),
        "assemblies": len(assemblies),
        "proteins": len(b.sequences),
        "missing_gff_assembly": missing_gff,
        "unknown_taxid": UNKNOWN_TAXID,
        "shared_protein": shared_wp,
        "shared_protein_assembly": assemblies[3]["acc"],
        "idmapping_rows": len(idmap_rows),
        "taxonomy_rows": len(TAXA) + len(EXTRA_TAXA),
    }
    write(os.path.join(out, "expected.json"), json.dumps(expected, indent=1, sort_keys=True) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "data", "mini"))
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()
    build(os.path.normpath(args.out), args.seed)


if __name__ == "__main__":
    main()
