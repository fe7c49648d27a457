from app.Reader.Reader import Reader
from app.Reader.Writer import Writer

__all__ = ['Reader', 'Writer']
