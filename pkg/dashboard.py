from rich.table import Table
from rich.panel import Panel
from rich.console import Console
from rich import box
from fractions import Fraction
from typing import Any, Dict, IO, List, Optional, Sequence

try:
    from . import config
    from .seq_core import decimal_display
except ImportError:
    import config
    from seq_core import decimal_display

# verify 套件表格列：(行字段, 表头)
SUITE_COLUMNS = {
    'fact1': [('trial', '#'), ('n', 'n'), ('base', '基'), ('sum', 'Σ‖x*‖‖x−y‖'), ('passes', '<1'),
              ('invertible', '可逆'), ('k1', 'k1'), ('k2', 'k2')],
    'thm1': [('trial', '#'), ('n', 'n'), ('base', '基'), ('k', 'k'), ('m', 'm'),
             ('bound_low', 'k/(k+m)'), ('actual_low', 'K1'), ('actual_high', 'K2'),
             ('bound_high', 'k/(k−m)'), ('recovery_holds', '恢复')],
    'thm2': [('trial', '#'), ('n', 'n'), ('base', '基'), ('K', 'K'), ('k1_sq', 'k1²'),
             ('k_sq', 'inf‖x‖₂²/(2K²)'), ('k2', 'k2')],
    'fact2': [('trial', '#'), ('n', 'n'), ('C', 'C'), ('lhs_sq_scaled', '2C²‖Σαx‖²'),
              ('rhs_upper_sq', '(Σ|α|‖x‖₂)² ≤')],
    'prop1': [('n', 'n'), ('k1', 'k1'), ('expected_k1', '闭式 k1'), ('k2', 'k2'),
              ('sup_norm', 'max|x1(i)|'), ('direct_sum_sup_norm', '直和 sup')],
    'c2': [('n', 'n'), ('delta_min', 'δ_min'), ('expected', '2(n−1)/n'), ('brute_force', '穷举'),
           ('indexwise_delta', '不重排')],
    'lemma1': [('trial', '#'), ('n', 'n'), ('k1', 'k1'), ('oracle_k1', '顶点 k1'),
               ('k2', 'k2'), ('oracle_k2', '顶点 k2')],
    'unconditional': [('trial', '#'), ('n', 'n'), ('K', 'K'), ('oracle', '定义 K'), ('witness', 'ε')],
    'interp': [('trial', '#'), ('p', 'p'), ('size', '长度'), ('lhs', '‖v‖_p'), ('equality', '取等')],
    'search-c': [('trial', '#'), ('n', 'n'), ('delta_min', 'δ_min'), ('indexwise_delta', '不重排')],
}


def fmt(value: Any, precision: Optional[int] = None) -> str:
    """Exact rational followed by its decimal rendering."""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "✓" if value else "✗"
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value} ≈ {decimal_display(value, precision)}"
    if isinstance(value, (list, tuple)):
        return " ".join("+" if v == 1 else "−" if v == -1 else str(v) for v in value)
    return str(value)


class ReportDashboard:
    def __init__(self, file: Optional[IO[str]] = None, precision: Optional[int] = None):
        self.console = Console(file=file, highlight=False, soft_wrap=False)
        self.precision = precision or config.DISPLAY_PRECISION
        self.MAX_ROWS = 20

    def _banner(self, title: str) -> None:
        self.console.print(f"[bold]{config.APP_NAME} {config.VERSION}[/bold] · {title}")

    def constants_table(self, entries: Sequence[tuple]) -> Table:
        """entries: (name, value, provenance)."""
        table = Table(box=box.ROUNDED)
        table.add_column("常数", style="cyan", no_wrap=True)
        table.add_column("值", justify="right")
        table.add_column("来源", style="dim")
        for name, value, provenance in entries:
            table.add_row(name, fmt(value, self.precision), provenance or "")
        return table

    def render_analysis(self, a: Dict[str, Any]) -> None:
        """a: the structured analysis produced by cli.cmd_analyze (before JSON conversion)."""
        self._banner(f"analyze {a['input']} (n={a['n']})")
        self.console.print(f"[dim]{a['digest']}[/dim]")
        rows = [
            ("k1", a['k1'], a['provenance']['k1']),
            ("k2", a['k2'], a['provenance']['k2']),
        ]
        if a.get('K') is not None:
            rows.append(("K", a['K'], f"{a['provenance']['K']}, ε = {fmt(a['K_witness'])}"))
        else:
            rows.append(("K", None, a.get('K_skipped', '')))
        if a.get('delta_min') is not None:
            rows.append(("δ_min", a['delta_min'], a['provenance']['delta_min']))
            rows.append(("δ (不重排)", a['indexwise_delta'], "standard order"))
        self.console.print(self.constants_table(rows))

        duals = Table(title="系数泛函范数 ‖x_j*‖", box=box.SIMPLE)
        duals.add_column("j", justify="right")
        duals.add_column("‖x_j*‖", justify="right")
        for j, v in enumerate(a['dual_norms'], start=1):
            duals.add_row(str(j), fmt(v, self.precision))
        self.console.print(duals)

        for key, title in (('thm2', '(k,1) 等价证书'), ('against', '相对于 --against')):
            section = a.get(key)
            if not section:
                continue
            table = Table(title=title, box=box.SIMPLE)
            table.add_column("项")
            table.add_column("值", justify="right")
            for name, value in section.items():
                table.add_row(name, fmt(value, self.precision))
            self.console.print(table)

    def suite_table(self, statement: str, rows: List[Dict[str, Any]]) -> Table:
        columns = SUITE_COLUMNS.get(statement) or ([(k, k) for k in rows[0]] if rows else [])
        table = Table(title=f"verify {statement}", box=box.ROUNDED)
        for _, header in columns:
            table.add_column(header, justify="right")
        table.add_column("状态", justify="center")
        for row in rows:
            status = "[green]✓[/green]" if row.get('holds', True) else "[bold red]✗[/bold red]"
            if row.get('not_applicable'):
                status = "[dim]n/a[/dim]"
            table.add_row(*[fmt(row.get(k), self.precision) for k, _ in columns], status)
        return table

    def render_suite(self, statement: str, rows: List[Dict[str, Any]], summary: Dict[str, Any]) -> None:
        self._banner(f"verify {statement}")
        violations = [r for r in rows if not r.get('holds', True)]
        # 确定性套件逐 n 全部展示；随机套件只展示违例（没有违例时展示前 MAX_ROWS 行）
        if statement in ('prop1', 'c2'):
            shown = rows
        else:
            shown = violations or rows[:self.MAX_ROWS]
        if shown:
            self.console.print(self.suite_table(statement, shown))
        if len(rows) > len(shown) and not violations:
            self.console.print(f"[dim]… {len(rows) - len(shown)} more trial(s), see --csv / --json[/dim]")
        self.console.print(self.summary_panel(summary))
        for r in violations:
            if r.get('instance'):
                self.console.print(Panel(r['instance'].rstrip(), title=f"violation #{r.get('trial', r.get('n'))}",
                                         border_style="red"))

    def summary_panel(self, summary: Dict[str, Any]) -> Panel:
        lines = []
        for key, value in summary.items():
            if key == 'witness':
                continue
            lines.append(f"{key}: {fmt(value, self.precision)}")
        ok = not summary.get('violations')
        return Panel("\n".join(lines), title="汇总", border_style="green" if ok else "red")

    def render_search(self, rows: List[Dict[str, Any]], summary: Dict[str, Any]) -> None:
        self._banner("search-c")
        top = sorted(rows, key=lambda r: (-r['delta_min'], r['trial']))[:self.MAX_ROWS]
        if top:
            self.console.print(self.suite_table('search-c', top))
        self.console.print(self.summary_panel(summary))
        if summary.get('witness'):
            self.console.print(Panel(summary['witness'].rstrip(), title="最大 δ_min 的基", border_style="blue"))
