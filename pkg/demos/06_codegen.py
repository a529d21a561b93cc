"""End to end: layouts spliced into a kernel template.

The template is ordinary code with {{ }} placeholders; the manifest
declares the layouts and index variables. Instantiation turns each
placeholder into a simplified index expression: the program-id swizzle
comes from a block layout's inverse, the per-axis index vectors from
sliced tilings (aranges under the triton profile), and the operand
offsets from the data layouts over those vectors.
"""

from lego import instantiate, parse_manifest, parse_template

TEMPLATE = """\
@triton.jit
def matmul_kernel(a_ptr, b_ptr, c_ptr, pid, k):
    pid_m, pid_n = {{ Blk.inv(pid) }}
    idx_m = {{ Axis[pid_m, :] }}
    idx_k = {{ Axis[k, :] }}
    idx_n = {{ Axis[pid_n, :] }}
    a = tl.load(a_ptr + ({{ Data[idx_m, idx_k] }}))
    b = tl.load(b_ptr + ({{ Data[idx_k, idx_n] }}))
    acc = tl.dot(a, b)
    tl.store(c_ptr + ({{ Data[idx_m, idx_n] }}), acc)
"""

MANIFEST = """\
[layouts]
# program ids walk the 2x2 grid of output tiles column-major
Blk = GroupBy([2,2]).OrderBy(Col(2,2))
# one matrix axis: 2 blocks of 4 lanes
Axis = TileBy([2],[4]).OrderBy(Row(8))
# operands stored row-major
Data = GroupBy([8,8]).OrderBy(Row(8,8))

[vars]
pid in [0, 4)
pid_m in [0, 2)
pid_n in [0, 2)
k in [0, 2)
idx_m vec in [0, 8)
idx_k vec in [0, 8)
idx_n vec in [0, 8)

[target]
triton
"""

rendered = instantiate(parse_template(TEMPLATE), parse_manifest(MANIFEST))
print(rendered)

# Swap the Data layout for a column-major one and only the offsets change;
# the kernel body is untouched. This is the whole point: exploring layouts
# without rewriting index arithmetic.
colmajor = MANIFEST.replace("Data = GroupBy([8,8]).OrderBy(Row(8,8))",
                            "Data = GroupBy([8,8]).OrderBy(Col(8,8))")
print("--- with column-major operands ---")
for line in instantiate(parse_template(TEMPLATE), parse_manifest(colmajor)).splitlines():
    if "tl.load" in line or "tl.store" in line:
        print(line)
