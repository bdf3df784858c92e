"""
PDF Exporter for sweep reports.
Renders the accuracy/cost table of an fps sweep with reportlab and falls
back to a plain text table when reportlab is missing or fails.
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import List, Sequence

logger = logging.getLogger(__name__)

try:
    import reportlab
    from reportlab.lib import colors
    from reportlab.lib.enums import TA_CENTER
    from reportlab.lib.pagesizes import A4, landscape
    from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
    from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

    REPORTLAB_AVAILABLE = True
    REPORTLAB_VERSION = getattr(reportlab, '__version__', 'unknown')
except ImportError as e:
    REPORTLAB_AVAILABLE = False
    REPORTLAB_VERSION = None
    logger.debug(f"ReportLab not available ({e}); sweep reports fall back to text")

from services.sweep_service import CellStatus, CostReport, SweepResult

COLUMNS = ['Method', 'FPS', 'State', 'RMSE', 'Avg ms', 'Max ms', 'Newton avg', 'Newton max', 'Outcome']

STATUS_COLOURS = {
    CellStatus.OK: '#d4edda',
    CellStatus.DEGRADED: '#fff3cd',
    CellStatus.DIVERGENT: '#f8d7da',
}


def table_rows(reports: Sequence[CostReport]) -> List[List[str]]:
    """Display rows, one per (cell, reported state)."""
    rows = []
    for report in reports:
        newton_avg = "" if report.newton_avg is None else f"{report.newton_avg:.2f}"
        newton_max = "" if report.newton_max is None else str(report.newton_max)
        for state, value in report.rmse.items():
            rows.append([report.method.upper(), f"{report.fps:g}", state, f"{value:.3e}",
                         f"{report.avg_ms:.3f}", f"{report.max_ms:.3f}", newton_avg, newton_max,
                         report.status.value])
    return rows


class PDFExporter:
    """Exporter for sweep reports with text fallback."""

    def __init__(self, export_dir: str = "out"):
        """
        Initialize PDF exporter.

        Args:
            export_dir: Directory where reports will be saved
        """
        self.export_dir = Path(export_dir)
        self.export_dir.mkdir(parents=True, exist_ok=True)
        self.reportlab_available = REPORTLAB_AVAILABLE

        if REPORTLAB_AVAILABLE:
            try:
                self._init_styles()
            except Exception as e:
                logger.warning(f"Error initializing PDF styles: {e}")
                self.reportlab_available = False

    def _init_styles(self):
        self.styles = getSampleStyleSheet()
        self.title_style = ParagraphStyle(
            'SweepTitle',
            parent=self.styles['Heading1'],
            fontSize=18,
            textColor=colors.HexColor('#2c3e50'),
            spaceAfter=18,
            alignment=TA_CENTER,
            fontName='Helvetica-Bold'
        )
        self.normal_style = self.styles['Normal']

    def export_sweep_report(self, result: SweepResult, filename: str = "sweep_report") -> str:
        """
        Export the sweep table to PDF, or to text if PDF output is unavailable.

        Args:
            result: Finished sweep
            filename: File name without extension

        Returns:
            Full path to created file
        """
        if not self.reportlab_available:
            logger.warning("ReportLab unavailable, using text fallback")
            return self._export_text_fallback(result, filename)

        try:
            return self._export_pdf_report(result, filename)
        except Exception as e:
            logger.warning(f"PDF export failed ({e}); falling back to text export")
            return self._export_text_fallback(result, filename)

    def _export_text_fallback(self, result: SweepResult, filename: str) -> str:
        filepath = self.export_dir / f"{filename}.txt"
        widths = [6, 8, 10, 11, 9, 9, 11, 11, 10]
        with open(filepath, 'w', encoding='utf-8') as f:
            f.write("=" * 90 + "\n")
            f.write(f"FPS SWEEP: {result.scenario.model}\n")
            f.write("=" * 90 + "\n\n")
            f.write("".join(f"{c:<{w}}" for c, w in zip(COLUMNS, widths)) + "\n")
            f.write("-" * 90 + "\n")
            for row in table_rows(result.reports):
                f.write("".join(f"{c:<{w}}" for c, w in zip(row, widths)) + "\n")
            for report in result.reports:
                if report.message:
                    f.write(f"\n{report.method} @ {report.fps:g} fps: {report.message}")
            f.write("\n")
        logger.info(f"Text report created: {filepath}")
        return str(filepath)

    def _export_pdf_report(self, result: SweepResult, filename: str) -> str:
        filepath = self.export_dir / f"{filename}.pdf"
        doc = SimpleDocTemplate(str(filepath), pagesize=landscape(A4),
                                rightMargin=36, leftMargin=36, topMargin=36, bottomMargin=18)

        story = [
            Paragraph(f"FPS sweep: {result.scenario.model.upper()}", self.title_style),
            Paragraph(f"<b>Horizon:</b> {result.scenario.t_end:g} s &nbsp; "
                      f"<b>Truth step:</b> {result.scenario.truth_dt:.3e} s &nbsp; "
                      f"<b>Generated:</b> {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}",
                      self.normal_style),
            Spacer(1, 12),
        ]

        body = table_rows(result.reports)
        table = Table([COLUMNS] + body, repeatRows=1)
        style = [
            ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#2c3e50')),
            ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
            ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
            ('FONTSIZE', (0, 0), (-1, -1), 8),
            ('ALIGN', (0, 0), (-1, -1), 'CENTER'),
            ('GRID', (0, 0), (-1, -1), 0.5, colors.grey),
        ]
        for i, row in enumerate(body, start=1):
            colour = STATUS_COLOURS.get(CellStatus(row[-1]))
            if colour:
                style.append(('BACKGROUND', (8, i), (8, i), colors.HexColor(colour)))
        table.setStyle(TableStyle(style))
        story.append(table)

        doc.build(story)
        logger.info(f"PDF report created: {filepath}")
        return str(filepath)
